//! Deterministic seed plumbing.
//!
//! Every random choice in the crate draws from a ChaCha8 stream selected by a
//! `(seed, stream)` pair, so independent stages never share a generator and
//! results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags for the stages of a single test run.
pub mod stream {
    pub const PARTITION: u64 = 1;
    pub const SPLIT: u64 = 2;
    pub const TRAIN_FULL: u64 = 3;
    pub const TRAIN_YZ: u64 = 4;
    pub const DIRECTIONS: u64 = 10;
    pub const COUPLING: u64 = 11;
    pub const SAMPLES: u64 = 12;
    pub const RELATIONS: u64 = 20;
}

pub fn rng(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes `seed` and `index` into a new well-spread seed (splitmix64 finalizer).
pub fn derive(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
