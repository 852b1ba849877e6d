//! Post-nonlinear noise generator with known ground truth.
//!
//! `Z ~ N(1, 1)^dz`, `X = cos(aᵀZ + η₁)` and either `Y = cos(bᵀZ + η₂)` (CI)
//! or `Y = cos(bᵀZ + cX + η₂)` (not CI), with `η₁, η₂ ~ N(0, var_eta)` and unit
//! directions `a`, `b` fixed per dataset.

use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bootstrap::ConditionalSampler;
use crate::data::{Dataset, DimSpec, Table};
use crate::relations::CausalGraph;
use crate::seed::{self, Rng};
use crate::ci_test::Decision;
use crate::{Error, Result};

pub const DEFAULT_VAR_ETA: f64 = 0.25;
pub const MAX_COUPLING: f64 = 2.0;

/// Standard-normal draw normalized to unit length.
pub fn sample_unit_vector(d: usize, seed: u64) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::InvalidParam("unit vector dimension must be positive".into()));
    }
    let mut rng = seed::rng(seed, seed::stream::DIRECTIONS);
    Ok(unit_vector(d, &mut rng))
}

fn unit_vector(d: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PnlConfig {
    pub n: usize,
    pub d_z: usize,
    pub dependent: bool,
    pub var_eta: f64,
    /// Coupling of X into Y; zero when not dependent.
    pub c: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub seed: u64,
}

impl PnlConfig {
    /// Draws `a`, `b` and (when dependent) `c ~ U[0, 2]` from `seed`.
    pub fn new(n: usize, d_z: usize, dependent: bool, seed: u64) -> Result<Self> {
        if d_z == 0 {
            return Err(Error::InvalidParam("d_z must be positive".into()));
        }
        let mut rng = seed::rng(seed, seed::stream::DIRECTIONS);
        let a = unit_vector(d_z, &mut rng);
        let b = unit_vector(d_z, &mut rng);
        let c = if dependent {
            seed::rng(seed, seed::stream::COUPLING).random_range(0.0..=MAX_COUPLING)
        } else {
            0.0
        };
        Ok(PnlConfig {
            n,
            d_z,
            dependent,
            var_eta: DEFAULT_VAR_ETA,
            c,
            a,
            b,
            seed,
        })
    }

    pub fn with_var_eta(mut self, var_eta: f64) -> Self {
        self.var_eta = var_eta;
        self
    }

    pub fn with_coupling(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn dims(&self) -> DimSpec {
        DimSpec {
            dx: 1,
            dy: 1,
            dz: self.d_z,
        }
    }

    pub fn ground_truth(&self) -> Decision {
        if self.dependent {
            Decision::NotCi
        } else {
            Decision::Ci
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.check(false)
    }

    fn check(&self, allow_noiseless: bool) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParam(msg));
        if self.d_z == 0 {
            return bad("d_z must be positive".into());
        }
        for (name, v) in [("a", &self.a), ("b", &self.b)] {
            if v.len() != self.d_z {
                return bad(format!("{name} has {} entries, expected {}", v.len(), self.d_z));
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return bad(format!("{name} has norm {norm}, expected 1"));
            }
        }
        let noise_ok = if allow_noiseless { self.var_eta >= 0.0 } else { self.var_eta > 0.0 };
        if !(noise_ok && self.var_eta.is_finite()) {
            return bad(format!("var_eta must be positive, got {}", self.var_eta));
        }
        if !(0.0..=MAX_COUPLING).contains(&self.c) {
            return bad(format!("c must lie in [0, 2], got {}", self.c));
        }
        if self.dependent == (self.c == 0.0) {
            return bad(format!(
                "c must be nonzero exactly when the data is dependent (dependent={}, c={})",
                self.dependent, self.c
            ));
        }
        Ok(())
    }

    fn noise(&self) -> Normal<f64> {
        Normal::new(0.0, self.var_eta.sqrt()).expect("validated variance")
    }
}

#[inline]
fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Generates the dataset described by `config` and its ground-truth label.
pub fn gen_pnl(config: &PnlConfig) -> Result<(Dataset, Decision)> {
    config.validate()?;
    generate(config)
}

fn generate(config: &PnlConfig) -> Result<(Dataset, Decision)> {
    let noise = config.noise();
    let z_dist = Normal::new(1.0, 1.0).expect("unit normal");
    let mut rng = seed::rng(config.seed, seed::stream::SAMPLES);
    let mut values = Vec::with_capacity(config.n * (config.d_z + 2));
    let mut z = vec![0.0; config.d_z];
    for _ in 0..config.n {
        z.iter_mut().for_each(|v| *v = z_dist.sample(&mut rng));
        let eta1 = noise.sample(&mut rng);
        let eta2 = noise.sample(&mut rng);
        let x = (dot(&config.a, &z) + eta1).cos();
        let y = if config.dependent {
            (dot(&config.b, &z) + config.c * x + eta2).cos()
        } else {
            (dot(&config.b, &z) + eta2).cos()
        };
        values.push(x);
        values.push(y);
        values.extend_from_slice(&z);
    }
    Ok((Dataset::new(values, config.dims())?, config.ground_truth()))
}

/// Conditional samplers of the post-nonlinear family. `Y | Z` in the dependent
/// case marginalizes X by drawing a private `X* | Z`, so pairing it with an
/// independent `X | Z` yields exact draws of the conditionally independent
/// factorization.
#[derive(Debug, Clone)]
pub struct PnlSamplers {
    config: PnlConfig,
    noise: Normal<f64>,
}

pub fn pnl_conditional_samplers(config: &PnlConfig) -> Result<PnlSamplers> {
    config.validate()?;
    Ok(PnlSamplers {
        noise: config.noise(),
        config: config.clone(),
    })
}

impl ConditionalSampler for PnlSamplers {
    fn dims(&self) -> DimSpec {
        self.config.dims()
    }

    fn sample_z(&self, rng: &mut Rng) -> Vec<f64> {
        let z_dist = Normal::new(1.0, 1.0).expect("unit normal");
        (0..self.config.d_z).map(|_| z_dist.sample(rng)).collect()
    }

    fn sample_x_given_z(&self, z: &[f64], rng: &mut Rng) -> Vec<f64> {
        vec![(dot(&self.config.a, z) + self.noise.sample(rng)).cos()]
    }

    fn sample_y_given_z(&self, z: &[f64], rng: &mut Rng) -> Vec<f64> {
        let bz = dot(&self.config.b, z);
        if self.config.dependent {
            let x_star = self.sample_x_given_z(z, rng)[0];
            vec![(bz + self.config.c * x_star + self.noise.sample(rng)).cos()]
        } else {
            vec![(bz + self.noise.sample(rng)).cos()]
        }
    }
}

/// `n` rows from a linear-Gaussian model on `graph`: each node is a weighted
/// sum of its parents plus `N(0, 1)` noise. Weights are drawn uniformly from
/// `±[0.5, 1.5]` per edge. Columns follow the graph's node order.
pub fn gen_linear_gaussian(graph: &CausalGraph, n: usize, seed: u64) -> Result<Table> {
    if graph.is_empty() {
        return Err(Error::Empty("graph"));
    }
    let mut rng = seed::rng(seed, seed::stream::COUPLING);
    let weights: Vec<Vec<f64>> = (0..graph.len())
        .map(|v| {
            graph
                .parents_of(v)
                .iter()
                .map(|_| {
                    let w = rng.random_range(0.5..1.5);
                    if rng.random::<bool>() {
                        w
                    } else {
                        -w
                    }
                })
                .collect()
        })
        .collect();
    let order = graph.topological_order();
    let mut rng = seed::rng(seed, seed::stream::SAMPLES);
    let width = graph.len();
    let mut values = vec![0.0; n * width];
    for row in values.chunks_exact_mut(width) {
        for &v in &order {
            let noise: f64 = StandardNormal.sample(&mut rng);
            let parents: f64 = graph
                .parents_of(v)
                .iter()
                .zip(&weights[v])
                .map(|(&p, w)| w * row[p])
                .sum();
            row[v] = parents + noise;
        }
    }
    Table::new(graph.names().to_vec(), values)
}
