//! Nearest-neighbor bootstrap.
//!
//! For each row `(x, y, z)` of `u1`, find the row of `u2` whose Z-block is
//! nearest to `z` and emit `(x, y', z)` with that row's Y-block `y'`. The
//! output approximates draws from `f(x|z) f(y|z) f(z)`.

use crate::data::Dataset;
use crate::nn::NnIndex;
use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct BootstrapOutput {
    /// The simulated rows, in `u1` order.
    pub u2_prime: Dataset,
    /// `(row in u1, matched row in u2)` for every output row.
    pub source_map: Vec<(usize, usize)>,
}

impl BootstrapOutput {
    /// Number of distinct `u2` rows that lent their Y-block to more than one
    /// output row.
    pub fn shared_neighbors(&self) -> usize {
        let mut uses = std::collections::HashMap::new();
        for &(_, j) in &self.source_map {
            *uses.entry(j).or_insert(0usize) += 1;
        }
        uses.values().filter(|&&c| c > 1).count()
    }
}

/// Swaps each `u1` row's Y-block for the Y-block of its Z-nearest neighbor in
/// `u2`. Neighbors may be reused; ties go to the lowest `u2` row index.
pub fn datagen(u1: &Dataset, u2: &Dataset) -> Result<BootstrapOutput> {
    let dims = u1.dims();
    if u2.dims() != dims {
        return Err(Error::DimMismatch(format!("{:?} vs {:?}", dims, u2.dims())));
    }
    if u2.is_empty() {
        return Err(Error::Empty("bootstrap reference set"));
    }
    let index = NnIndex::build(&u2.z_block(), dims.dz)?;
    let mut values = Vec::with_capacity(u1.values().len());
    let mut source_map = Vec::with_capacity(u1.len());
    for (i, row) in u1.rows().enumerate() {
        let (j, _) = index.nearest(&row[dims.z_cols()])?;
        values.extend_from_slice(&row[dims.x_cols()]);
        values.extend_from_slice(u2.y(j));
        values.extend_from_slice(&row[dims.z_cols()]);
        source_map.push((i, j));
    }
    Ok(BootstrapOutput {
        u2_prime: Dataset::new(values, dims)?,
        source_map,
    })
}

/// A generative model that can sample `Z`, `X | Z` and `Y | Z` separately.
pub trait ConditionalSampler {
    fn dims(&self) -> crate::data::DimSpec;
    fn sample_z(&self, rng: &mut seed::Rng) -> Vec<f64>;
    fn sample_x_given_z(&self, z: &[f64], rng: &mut seed::Rng) -> Vec<f64>;
    fn sample_y_given_z(&self, z: &[f64], rng: &mut seed::Rng) -> Vec<f64>;
}

/// `n` exact draws from the conditionally independent factorization: draw
/// `z`, then `x | z` and `y | z` independently.
pub fn empirical_fci_oracle<S: ConditionalSampler + ?Sized>(
    n: usize,
    sampler: &S,
    seed: u64,
) -> Result<Dataset> {
    let dims = sampler.dims();
    let mut rng = seed::rng(seed, seed::stream::SAMPLES);
    let mut values = Vec::with_capacity(n * dims.width());
    for _ in 0..n {
        let z = sampler.sample_z(&mut rng);
        let x = sampler.sample_x_given_z(&z, &mut rng);
        let y = sampler.sample_y_given_z(&z, &mut rng);
        values.extend(x);
        values.extend(y);
        values.extend(z);
    }
    Dataset::new(values, dims)
}
