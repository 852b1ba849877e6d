//! Metrics and the benchmark harness.
//!
//! - [`roc_auc`]: area under the ROC curve via the Mann–Whitney identity.
//! - [`tv_histogram_estimate`]: plug-in total variation between two samples
//!   in one or two dimensions.
//! - [`theorem1_bound`]: the finite-sample TV bound of the nearest-neighbor
//!   bootstrap.
//! - [`run_benchmark`] and [`run_graph_benchmark`]: generate labeled
//!   datasets, score each with the bootstrap-aggregated test, report AUC.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::ci_test::{ccit_bootstrap, n_test_for, Decision, Tau, Variant, DEFAULT_BOOTSTRAPS};
use crate::classifier::GbtParams;
use crate::data::Table;
use crate::relations::{gen_ci_relations, gen_nonci_relations, slice_relation, CausalGraph};
use crate::seed;
use crate::synthetic::{gen_pnl, PnlConfig};
use crate::{Error, Result};

pub const DEFAULT_TV_BINS: usize = 32;

/// Probability that a random positive (label 1) outscores a random negative
/// (label 0), ties counting one half.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimMismatch(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::InvalidParam(format!("score {i} is NaN")));
    }
    if let Some(&l) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::InvalidParam(format!("label {l} is not 0 or 1")));
    }
    let n1 = labels.iter().filter(|&&l| l == 1).count() as u64;
    let n0 = labels.len() as u64 - n1;
    if n1 == 0 {
        return Err(Error::SingleClass(0));
    }
    if n0 == 0 {
        return Err(Error::SingleClass(1));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Twice the rank sum of the positives, with tied groups sharing their
    // average rank. Doubling keeps everything in integers.
    let mut twice_rank_sum = 0u64;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let twice_avg_rank = (start + 1 + end) as u64;
        let positives = order[start..end].iter().filter(|&&i| labels[i] == 1).count() as u64;
        twice_rank_sum += positives * twice_avg_rank;
        start = end;
    }
    let twice_u = twice_rank_sum - n1 * (n1 + 1);
    Ok(twice_u as f64 / (2 * n1 * n0) as f64)
}

/// Half the L1 distance between the normalized histograms of two samples of
/// `dim`-dimensional rows (flattened row-major), on a shared grid of
/// `bins` cells per axis spanning the joint bounding box.
pub fn tv_histogram_estimate(sa: &[f64], sb: &[f64], dim: usize, bins: usize) -> Result<f64> {
    if dim == 0 || dim > 2 {
        return Err(Error::InvalidParam(format!(
            "histogram TV supports dimension 1 or 2, got {dim}"
        )));
    }
    if bins == 0 {
        return Err(Error::InvalidParam("bins must be positive".into()));
    }
    for (name, s) in [("first sample", sa), ("second sample", sb)] {
        if s.is_empty() {
            return Err(Error::Empty(name));
        }
        if s.len() % dim != 0 {
            return Err(Error::DimMismatch(format!(
                "{name} length {} is not a multiple of {dim}",
                s.len()
            )));
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam(format!("{name} has a non-finite value")));
        }
    }

    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for row in sa.chunks_exact(dim).chain(sb.chunks_exact(dim)) {
        for k in 0..dim {
            lo[k] = lo[k].min(row[k]);
            hi[k] = hi[k].max(row[k]);
        }
    }
    let cell = |row: &[f64]| {
        let mut flat = 0;
        for k in 0..dim {
            let span = hi[k] - lo[k];
            let b = if span > 0.0 {
                (((row[k] - lo[k]) / span * bins as f64) as usize).min(bins - 1)
            } else {
                0
            };
            flat = flat * bins + b;
        }
        flat
    };
    let cells = bins.pow(dim as u32);
    let histogram = |s: &[f64]| {
        let mut h = vec![0usize; cells];
        for row in s.chunks_exact(dim) {
            h[cell(row)] += 1;
        }
        h
    };
    let (ha, hb) = (histogram(sa), histogram(sb));
    let (ma, mb) = ((sa.len() / dim) as f64, (sb.len() / dim) as f64);
    let l1: f64 = ha
        .iter()
        .zip(&hb)
        .map(|(&a, &b)| (a as f64 / ma - b as f64 / mb).abs())
        .sum();
    Ok((0.5 * l1).clamp(0.0, 1.0))
}

/// A nondecreasing map `δ ↦ G(δ) ∈ [0, 1]` given by breakpoints and linear
/// interpolation; constant beyond the first and last breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GFunction {
    points: Vec<(f64, f64)>,
}

impl GFunction {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParam("G needs at least one breakpoint".into()));
        }
        for (i, &(d, g)) in points.iter().enumerate() {
            if !d.is_finite() || !(0.0..=1.0).contains(&g) {
                return Err(Error::InvalidParam(format!(
                    "G breakpoint ({d}, {g}) must have a finite abscissa and a value in [0, 1]"
                )));
            }
            if i > 0 {
                let (pd, pg) = points[i - 1];
                if d <= pd {
                    return Err(Error::InvalidParam("G breakpoints must be strictly increasing".into()));
                }
                if g < pg {
                    return Err(Error::InvalidParam("G must be nondecreasing".into()));
                }
            }
        }
        Ok(GFunction { points })
    }

    /// `G ≡ 0`.
    pub fn zero() -> Self {
        GFunction { points: vec![(0.0, 0.0)] }
    }

    pub fn eval(&self, delta: f64) -> f64 {
        let pts = &self.points;
        if delta <= pts[0].0 {
            return pts[0].1;
        }
        let last = pts[pts.len() - 1];
        if delta >= last.0 {
            return last.1;
        }
        let j = pts.partition_point(|&(d, _)| d <= delta);
        let ((d0, g0), (d1, g1)) = (pts[j - 1], pts[j]);
        g0 + (g1 - g0) * (delta - d0) / (d1 - d0)
    }
}

/// Constants of the density assumptions behind the bootstrap TV bound.
///
/// `eps` must lie below the distribution's own threshold for the bound to
/// hold; that condition cannot be checked here. `radical_base` is the base
/// of the `base^(1/d_z)` factor inside the square root: 2 by default, and 4
/// gives the looser variant of the same bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TVBoundParams {
    pub beta: f64,
    pub c3: f64,
    pub c_d: f64,
    pub eps: f64,
    pub g_of: GFunction,
    pub radical_base: f64,
}

impl TVBoundParams {
    pub fn new(beta: f64, c3: f64, c_d: f64, eps: f64, g_of: GFunction) -> Result<Self> {
        let p = TVBoundParams {
            beta,
            c3,
            c_d,
            eps,
            g_of,
            radical_base: 2.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_radical_base(mut self, base: f64) -> Self {
        self.radical_base = base;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::InvalidParam(format!("beta must be nonnegative, got {}", self.beta)));
        }
        for (name, v) in [
            ("c3", self.c3),
            ("c_d", self.c_d),
            ("eps", self.eps),
            ("radical_base", self.radical_base),
        ] {
            if !positive(v) {
                return Err(Error::InvalidParam(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Volume of the unit Euclidean ball in `d` dimensions, `π^(d/2) / Γ(d/2 + 1)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    PI.powf(h) / gamma(h + 1.0)
}

/// Upper bound on the total variation between the bootstrap output with `n`
/// reference rows and the conditionally independent distribution.
pub fn theorem1_bound(n: usize, d_z: usize, p: &TVBoundParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParam("n must be at least 1".into()));
    }
    if d_z == 0 {
        return Err(Error::InvalidParam("d_z must be at least 1".into()));
    }
    p.validate()?;
    let d = d_z as f64;
    let n = n as f64;
    let vol = unit_ball_volume(d_z);
    let g = p.g_of.eval(2.0 * p.c_d * p.eps * p.eps);
    let curvature = (p.beta / 4.0) * (p.c3 * p.radical_base.powf(1.0 / d) * gamma(1.0 / d))
        / ((n * vol).powf(1.0 / d) * d);
    let sparse = p.beta * p.eps * g / 4.0;
    let far = (-0.5 * n * vol * p.c_d * p.eps.powf(d + 2.0)).exp();
    Ok(0.5 * (curvature + sparse).sqrt() + far + g)
}

/// Which benchmark the harness runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Pnl,
    Graph,
}

/// Configuration of the synthetic post-nonlinear benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub family: Family,
    pub n: usize,
    pub d_z: Vec<usize>,
    /// Datasets per `d_z` point. The first half are CI, the rest dependent.
    pub datasets: usize,
    #[serde(rename = "B")]
    pub bootstraps: usize,
    pub variant: Variant,
    pub tau: Tau,
    pub params: GbtParams,
    pub seed: u64,
}

impl BenchConfig {
    /// n=1000, d_z ∈ {1, 5, 20}, 40 datasets per point, 10 bootstraps, v2.
    pub fn desk(seed: u64) -> Self {
        BenchConfig {
            family: Family::Pnl,
            n: 1000,
            d_z: vec![1, 5, 20],
            datasets: 40,
            bootstraps: 10,
            variant: Variant::V2,
            tau: Tau::Auto,
            params: GbtParams::default(),
            seed,
        }
    }

    /// The full sweep: 300 datasets per point, 50 bootstraps, d_z up to 70.
    /// Expect hours of compute.
    pub fn full(seed: u64) -> Self {
        BenchConfig {
            d_z: vec![1, 5, 10, 20, 30, 50, 70],
            datasets: 300,
            bootstraps: DEFAULT_BOOTSTRAPS,
            ..Self::desk(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.family != Family::Pnl {
            return Err(Error::InvalidParam("run_benchmark handles the pnl family only".into()));
        }
        if self.d_z.is_empty() || self.d_z.contains(&0) {
            return Err(Error::InvalidParam("d_z list must be nonempty and positive".into()));
        }
        if self.datasets < 2 || self.datasets % 2 != 0 {
            return Err(Error::InvalidParam(format!(
                "datasets must be a positive even number, got {}",
                self.datasets
            )));
        }
        if self.bootstraps == 0 {
            return Err(Error::InvalidParam("B must be positive".into()));
        }
        self.params.validate()
    }
}

/// Outcome of one benchmark dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetOutcome {
    pub index: usize,
    pub seed: u64,
    pub ground_truth: Decision,
    pub score: f64,
    pub decision: Decision,
    /// Wall-clock seconds. Left out of serialized output unless kept, so
    /// reports stay reproducible byte for byte.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_secs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchPoint {
    pub d_z: usize,
    pub auc: f64,
    pub per_dataset: Vec<DatasetOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub points: Vec<BenchPoint>,
}

impl BenchReport {
    pub fn strip_timings(&mut self) {
        for p in &mut self.points {
            for d in &mut p.per_dataset {
                d.runtime_secs = None;
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `d_z,auc` lines with a header.
    pub fn auc_csv(&self) -> String {
        let mut out = String::from("d_z,auc\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.d_z, p.auc));
        }
        out
    }
}

fn auc_of(outcomes: &[DatasetOutcome]) -> Result<f64> {
    let scores: Vec<f64> = outcomes.iter().map(|o| o.score).collect();
    let labels: Vec<u8> = outcomes
        .iter()
        .map(|o| u8::from(o.ground_truth == Decision::NotCi))
        .collect();
    roc_auc(&scores, &labels)
}

/// Seed of dataset `index` at the `point`-th `d_z` value.
pub fn bench_dataset_seed(seed: u64, point: usize, index: usize) -> u64 {
    seed::derive(seed::derive(seed, point as u64), index as u64)
}

/// Runs the post-nonlinear benchmark. Datasets run in parallel; the report
/// does not depend on scheduling.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> = (0..config.d_z.len())
        .flat_map(|p| (0..config.datasets).map(move |i| (p, i)))
        .collect();
    let tau = config.tau.resolve(n_test_for(config.n))?;
    let outcomes = jobs
        .par_iter()
        .map(|&(p, i)| {
            let start = Instant::now();
            let ds_seed = bench_dataset_seed(config.seed, p, i);
            let dependent = i >= config.datasets / 2;
            let pnl = PnlConfig::new(config.n, config.d_z[p], dependent, ds_seed)?;
            let (data, truth) = gen_pnl(&pnl)?;
            let agg = ccit_bootstrap(&data, config.bootstraps, tau, config.variant, &config.params, ds_seed)?;
            Ok(DatasetOutcome {
                index: i,
                seed: ds_seed,
                ground_truth: truth,
                score: agg.score,
                decision: agg.decision,
                runtime_secs: Some(start.elapsed().as_secs_f64()),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut points = Vec::with_capacity(config.d_z.len());
    for (p, chunk) in outcomes.chunks(config.datasets).enumerate() {
        points.push(BenchPoint {
            d_z: config.d_z[p],
            auc: auc_of(chunk)?,
            per_dataset: chunk.to_vec(),
        });
    }
    Ok(BenchReport {
        config: config.clone(),
        points,
    })
}

/// Configuration of the graph-derived benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphBenchConfig {
    /// Label of the graph source, echoed in the report.
    pub graph: String,
    pub nonci: usize,
    pub cond_size: usize,
    #[serde(rename = "B")]
    pub bootstraps: usize,
    pub variant: Variant,
    pub tau: Tau,
    pub params: GbtParams,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationOutcome {
    pub x: String,
    pub y: String,
    pub z: Vec<String>,
    pub ground_truth: Decision,
    pub score: f64,
    pub decision: Decision,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_secs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphBenchReport {
    pub config: GraphBenchConfig,
    pub rows: usize,
    pub ci_relations: usize,
    pub nonci_relations: usize,
    /// CI relations dropped because the conditioning set was empty.
    pub skipped_empty_z: usize,
    pub auc: f64,
    pub per_relation: Vec<RelationOutcome>,
}

impl GraphBenchReport {
    pub fn strip_timings(&mut self) {
        for r in &mut self.per_relation {
            r.runtime_secs = None;
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Tests every CI relation of `graph` and `nonci` random non-CI relations on
/// the columns of `table`, then scores the test by AUC.
pub fn run_graph_benchmark(table: &Table, graph: &CausalGraph, config: &GraphBenchConfig) -> Result<GraphBenchReport> {
    if config.bootstraps == 0 {
        return Err(Error::InvalidParam("B must be positive".into()));
    }
    config.params.validate()?;
    for name in graph.names() {
        table.column_index(name)?;
    }
    let ci = gen_ci_relations(graph);
    let total_ci = ci.len();
    let mut relations: Vec<_> = ci.into_iter().filter(|r| !r.z.is_empty()).collect();
    let skipped_empty_z = total_ci - relations.len();
    let ci_relations = relations.len();
    relations.extend(gen_nonci_relations(graph, config.nonci, config.cond_size, config.seed)?);
    let tau = config.tau.resolve(n_test_for(table.len()))?;

    let per_relation = relations
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let start = Instant::now();
            let data = slice_relation(table, r)?;
            let run_seed = seed::derive(config.seed, i as u64);
            let agg = ccit_bootstrap(&data, config.bootstraps, tau, config.variant, &config.params, run_seed)?;
            let mut z = r.z.clone();
            z.sort();
            Ok(RelationOutcome {
                x: r.x.clone(),
                y: r.y.clone(),
                z,
                ground_truth: r.label,
                score: agg.score,
                decision: agg.decision,
                runtime_secs: Some(start.elapsed().as_secs_f64()),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let scores: Vec<f64> = per_relation.iter().map(|r| r.score).collect();
    let labels: Vec<u8> = per_relation
        .iter()
        .map(|r| u8::from(r.ground_truth == Decision::NotCi))
        .collect();
    Ok(GraphBenchReport {
        config: config.clone(),
        rows: table.len(),
        ci_relations,
        nonci_relations: config.nonci,
        skipped_empty_z,
        auc: roc_auc(&scores, &labels)?,
        per_relation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (i, &si) in scores.iter().enumerate() {
            for (j, &sj) in scores.iter().enumerate() {
                if labels[i] == 1 && labels[j] == 0 {
                    den += 1.0;
                    if si > sj {
                        num += 1.0;
                    } else if si == sj {
                        num += 0.5;
                    }
                }
            }
        }
        num / den
    }

    #[test]
    fn auc_examples() {
        assert_eq!(roc_auc(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]).unwrap(), 0.75);
        assert_eq!(roc_auc(&[0.0, 0.1, 0.9, 1.0], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0.3; 6], &[0, 1, 0, 1, 1, 0]).unwrap(), 0.5);
    }

    #[test]
    fn auc_errors() {
        assert!(matches!(roc_auc(&[0.1, 0.2], &[1, 1]), Err(Error::SingleClass(_))));
        assert!(matches!(roc_auc(&[0.1, 0.2], &[0, 0]), Err(Error::SingleClass(_))));
        assert!(matches!(roc_auc(&[0.1], &[0, 1]), Err(Error::DimMismatch(_))));
        assert!(roc_auc(&[f64::NAN, 0.2], &[0, 1]).is_err());
        assert!(roc_auc(&[0.1, 0.2], &[0, 2]).is_err());
    }

    proptest! {
        #[test]
        fn auc_matches_pairwise(pairs in prop::collection::vec((0u8..8, 0u8..2), 2..60)) {
            let scores: Vec<f64> = pairs.iter().map(|p| p.0 as f64 / 4.0).collect();
            let labels: Vec<u8> = pairs.iter().map(|p| p.1).collect();
            prop_assume!(labels.contains(&0) && labels.contains(&1));
            prop_assert_eq!(roc_auc(&scores, &labels).unwrap(), pairwise_auc(&scores, &labels));
        }

        #[test]
        fn auc_monotone_invariance_and_negation(
            pairs in prop::collection::vec((-1e3f64..1e3, 0u8..2), 2..60)
        ) {
            let scores: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let labels: Vec<u8> = pairs.iter().map(|p| p.1).collect();
            prop_assume!(labels.contains(&0) && labels.contains(&1));
            let auc = roc_auc(&scores, &labels).unwrap();
            let cubed: Vec<f64> = scores.iter().map(|s| s.powi(3) + 5.0).collect();
            prop_assert_eq!(roc_auc(&cubed, &labels).unwrap(), auc);
            let mut distinct = scores.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            if distinct.len() == scores.len() {
                let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
                prop_assert!((roc_auc(&neg, &labels).unwrap() + auc - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn tv_symmetric_and_bounded(
            a in prop::collection::vec(-5f64..5.0, 2..80),
            b in prop::collection::vec(-5f64..5.0, 2..80),
            bins in 1usize..40,
        ) {
            for dim in [1, 2] {
                let (a, b) = (&a[..a.len() / dim * dim], &b[..b.len() / dim * dim]);
                let ab = tv_histogram_estimate(a, b, dim, bins).unwrap();
                let ba = tv_histogram_estimate(b, a, dim, bins).unwrap();
                prop_assert_eq!(ab, ba);
                prop_assert!((0.0..=1.0).contains(&ab));
            }
        }
    }

    #[test]
    fn tv_examples() {
        let a = [0.1, 0.5, 0.9, 0.3];
        assert_eq!(tv_histogram_estimate(&a, &a, 1, 32).unwrap(), 0.0);
        assert_eq!(tv_histogram_estimate(&[0.0, 1.0], &[2.0, 3.0], 1, 32).unwrap(), 1.0);
        assert_eq!(tv_histogram_estimate(&[1.0, 1.0], &[1.0], 1, 4).unwrap(), 0.0);
        // 2-D: same first coordinate, disjoint second coordinate.
        assert_eq!(tv_histogram_estimate(&[0.0, 0.0], &[0.0, 1.0], 2, 8).unwrap(), 1.0);
    }

    #[test]
    fn tv_same_gaussian_is_small() {
        use rand_distr::{Distribution, Normal};
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut rng = seed::rng(5, 0);
        let a: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
        assert!(tv_histogram_estimate(&a, &b, 1, 32).unwrap() < 0.08);
    }

    #[test]
    fn tv_errors() {
        assert!(tv_histogram_estimate(&[0.0; 3], &[0.0; 3], 3, 4).is_err());
        assert!(matches!(tv_histogram_estimate(&[], &[1.0], 1, 4), Err(Error::Empty(_))));
        assert!(tv_histogram_estimate(&[0.0; 3], &[0.0; 2], 2, 4).is_err());
        assert!(tv_histogram_estimate(&[0.0], &[1.0], 1, 0).is_err());
    }

    #[test]
    fn g_function() {
        let g = GFunction::new(vec![(0.0, 0.0), (1.0, 0.5), (3.0, 1.0)]).unwrap();
        assert_eq!(g.eval(-1.0), 0.0);
        assert_eq!(g.eval(0.5), 0.25);
        assert_eq!(g.eval(2.0), 0.75);
        assert_eq!(g.eval(9.0), 1.0);
        assert!(GFunction::new(vec![]).is_err());
        assert!(GFunction::new(vec![(0.0, 0.5), (1.0, 0.4)]).is_err());
        assert!(GFunction::new(vec![(1.0, 0.0), (1.0, 0.1)]).is_err());
        assert!(GFunction::new(vec![(0.0, 1.5)]).is_err());
        assert_eq!(GFunction::zero().eval(123.0), 0.0);
    }

    fn params(beta: f64) -> TVBoundParams {
        TVBoundParams::new(beta, 1.0, 1.0, 0.1, GFunction::zero()).unwrap()
    }

    /// Independent evaluation: unit-ball volume by the two-step recurrence,
    /// Γ from libm, powers through logarithms.
    fn bound_oracle(n: usize, d_z: usize, p: &TVBoundParams) -> f64 {
        fn ball(d: usize) -> f64 {
            match d {
                0 => 1.0,
                1 => 2.0,
                _ => 2.0 * PI / d as f64 * ball(d - 2),
            }
        }
        let d = d_z as f64;
        let n = n as f64;
        let v = ball(d_z);
        let g = p.g_of.eval(2.0 * p.c_d * p.eps * p.eps);
        let first = p.beta * p.c3 * ((p.radical_base.ln() - (n * v).ln()) / d).exp() * libm::tgamma(1.0 / d)
            / (4.0 * d);
        let radical = (first + p.beta * p.eps * g / 4.0).sqrt() / 2.0;
        radical + (-(n * v * p.c_d) / 2.0 * ((d + 2.0) * p.eps.ln()).exp()).exp() + g
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-14);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn bound_matches_oracle() {
        let p = params(1.0);
        let got = theorem1_bound(10_000, 1, &p).unwrap();
        assert!((got - bound_oracle(10_000, 1, &p)).abs() <= 1e-12 * got.max(1.0));
        let g = GFunction::new(vec![(0.0, 0.0), (0.1, 0.2)]).unwrap();
        let p = TVBoundParams::new(2.0, 0.5, 3.0, 0.2, g).unwrap().with_radical_base(4.0);
        for d in [1, 2, 3, 7, 20] {
            let got = theorem1_bound(500, d, &p).unwrap();
            assert!((got - bound_oracle(500, d, &p)).abs() <= 1e-12 * got.max(1.0), "d={d}");
        }
    }

    #[test]
    fn bound_decreases_in_n() {
        let p = params(1.0);
        for d in [1, 2, 5] {
            for n in [100, 1000, 10_000] {
                assert!(theorem1_bound(2 * n, d, &p).unwrap() < theorem1_bound(n, d, &p).unwrap());
            }
        }
    }

    #[test]
    fn bound_beta_zero_isolates_exponential() {
        let p = params(0.0);
        let got = theorem1_bound(1000, 2, &p).unwrap();
        let want = (-0.5 * 1000.0 * PI * 1.0 * 0.1f64.powi(4)).exp();
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn bound_errors() {
        assert!(theorem1_bound(0, 1, &params(1.0)).is_err());
        assert!(theorem1_bound(1, 0, &params(1.0)).is_err());
        assert!(TVBoundParams::new(-1.0, 1.0, 1.0, 0.1, GFunction::zero()).is_err());
        assert!(TVBoundParams::new(1.0, 0.0, 1.0, 0.1, GFunction::zero()).is_err());
        assert!(TVBoundParams::new(1.0, 1.0, 1.0, 0.0, GFunction::zero()).is_err());
    }

    fn tiny_bench() -> BenchConfig {
        BenchConfig {
            n: 240,
            d_z: vec![1],
            datasets: 4,
            bootstraps: 2,
            params: GbtParams {
                rounds: 15,
                ..GbtParams::default()
            },
            ..BenchConfig::desk(3)
        }
    }

    #[test]
    fn bench_is_deterministic_and_echoes_config() {
        let cfg = tiny_bench();
        let mut a = run_benchmark(&cfg).unwrap();
        let mut b = run_benchmark(&cfg).unwrap();
        a.strip_timings();
        b.strip_timings();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.config, cfg);
        let back: BenchReport = serde_json::from_str(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a);
        let p = &a.points[0];
        assert_eq!(p.per_dataset.len(), 4);
        assert_eq!(p.per_dataset[0].ground_truth, Decision::Ci);
        assert_eq!(p.per_dataset[3].ground_truth, Decision::NotCi);
        assert_eq!(p.auc, auc_of(&p.per_dataset).unwrap());
        assert!(!a.to_json().unwrap().contains("runtime"));
        assert_eq!(a.auc_csv().lines().count(), 2);
    }

    #[test]
    fn bench_config_validation() {
        let odd = BenchConfig { datasets: 3, ..tiny_bench() };
        assert!(run_benchmark(&odd).is_err());
        let empty = BenchConfig { d_z: vec![], ..tiny_bench() };
        assert!(run_benchmark(&empty).is_err());
        let graph = BenchConfig { family: Family::Graph, ..tiny_bench() };
        assert!(run_benchmark(&graph).is_err());
        assert_eq!(BenchConfig::full(1).datasets, 300);
    }
}
