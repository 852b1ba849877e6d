//! Classifier-based conditional independence testing.
//!
//! Given samples of `(X, Y, Z)`, the test decides whether `X ⫫ Y | Z` by
//! simulating the conditionally independent distribution with a
//! nearest-neighbor bootstrap over `Z` and then asking a binary classifier to
//! tell original rows from simulated rows. A classifier that cannot beat
//! chance is evidence of conditional independence.
//!
//! The crate is organised bottom-up:
//!
//! - [`data`]: datasets, CSV ingestion, partitioning and labeling.
//! - [`nn`]: exact 1-nearest-neighbor search (k-d tree plus brute force).
//! - [`bootstrap`]: the nearest-neighbor bootstrap and an exact sampler of the
//!   conditionally independent distribution for synthetic families.
//! - [`classifier`]: a gradient-boosted-trees learner and 0-1 risk.
//! - [`ci_test`]: the two test variants and their bootstrap aggregation.
//! - [`synthetic`]: the post-nonlinear noise generator.
//! - [`relations`]: causal graphs, Markov blankets and benchmark relations.
//! - [`eval`]: ROC AUC, histogram total variation, the bootstrap TV bound and
//!   the benchmark harness.
//! - [`cli`]: the `ccit` command-line tool.

pub mod bootstrap;
pub mod classifier;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod nn;
pub mod relations;
pub mod seed;
pub mod synthetic;

pub use error::{Error, Result};
