//! Binary classification stage.
//!
//! [`Learner`] / [`Classifier`] form the pluggable interface used by the test
//! procedures. [`GbtParams`] is the built-in learner: gradient boosting on the
//! logistic loss with depth-limited regression trees grown by exact greedy
//! split search. Split thresholds are midpoints between consecutive distinct
//! feature values and a row goes left when `value < threshold`.
//!
//! A model serializes to JSON as a list of trees, each a flat node list:
//!
//! ```json
//! {"base_score":0.0,"learning_rate":0.1,"feature_width":3,
//!  "trees":[{"nodes":[{"kind":"split","feature":1,"threshold":0.25,"left":1,"right":2},
//!                     {"kind":"leaf","weight":-0.4},{"kind":"leaf","weight":0.3}]}]}
//! ```
//!
//! The dump is meant for debugging and is not a stable format.

use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::{Error, Result};

/// Something that scores feature rows. Label 1 is predicted iff the margin is
/// `>= 0`.
pub trait Classifier {
    fn feature_width(&self) -> usize;

    /// Log-odds score of label 1. Callers must pass rows of `feature_width()`.
    fn margin(&self, row: &[f64]) -> f64;

    fn predict_margin(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.feature_width() {
            return Err(Error::DimMismatch(format!(
                "row has {} features, model expects {}",
                row.len(),
                self.feature_width()
            )));
        }
        Ok(self.margin(row))
    }

    fn predict(&self, row: &[f64]) -> Result<u8> {
        Ok(u8::from(self.predict_margin(row)? >= 0.0))
    }
}

/// A training procedure producing a [`Classifier`].
pub trait Learner: Sync {
    type Model: Classifier + Send;

    fn fit(&self, data: &LabeledDataset, seed: u64) -> Result<Self::Model>;
}

/// Hyperparameters of the built-in boosted-trees learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
    pub l2_reg: f64,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            rounds: 100,
            max_depth: 3,
            learning_rate: 0.1,
            min_leaf: 5,
            l2_reg: 1.0,
        }
    }
}

impl GbtParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParam(msg.to_string()));
        if self.rounds == 0 {
            return bad("rounds must be positive");
        }
        if self.max_depth == 0 {
            return bad("max_depth must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must lie in (0, 1]");
        }
        if self.min_leaf == 0 {
            return bad("min_leaf must be positive");
        }
        if !(self.l2_reg >= 0.0 && self.l2_reg.is_finite()) {
            return bad("l2_reg must be a nonnegative finite number");
        }
        Ok(())
    }
}

impl Learner for GbtParams {
    type Model = Model;

    fn fit(&self, data: &LabeledDataset, seed: u64) -> Result<Model> {
        train(data, self, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        weight: f64,
    },
}

/// A regression tree stored as a flat node list; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf(weight: f64) -> Self {
        Tree {
            nodes: vec![TreeNode::Leaf { weight }],
        }
    }

    /// Validates child links (they must point forward, so the tree is acyclic).
    pub fn from_nodes(nodes: Vec<TreeNode>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Empty("tree"));
        }
        for (i, node) in nodes.iter().enumerate() {
            if let TreeNode::Split { left, right, threshold, .. } = node {
                if *left <= i || *right <= i || *left >= nodes.len() || *right >= nodes.len() {
                    return Err(Error::InvalidParam(format!("node {i} has invalid children")));
                }
                if !threshold.is_finite() {
                    return Err(Error::InvalidParam(format!("node {i} has a non-finite threshold")));
                }
            }
        }
        Ok(Tree { nodes })
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                TreeNode::Split { feature, .. } => Some(*feature),
                TreeNode::Leaf { .. } => None,
            })
            .max()
    }

    pub fn output(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { weight } => return weight,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[feature] < threshold { left } else { right },
            }
        }
    }

    fn scale(&mut self, factor: f64) {
        for node in &mut self.nodes {
            if let TreeNode::Leaf { weight } = node {
                *weight *= factor;
            }
        }
    }
}

/// A trained boosted-trees model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub base_score: f64,
    pub learning_rate: f64,
    pub feature_width: usize,
    pub trees: Vec<Tree>,
    /// Mean training logistic loss before the first round and after each round.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub training_loss: Vec<f64>,
}

impl Model {
    pub fn new(base_score: f64, learning_rate: f64, feature_width: usize, trees: Vec<Tree>) -> Result<Self> {
        if let Some(f) = trees.iter().filter_map(Tree::max_feature).max() {
            if f >= feature_width {
                return Err(Error::DimMismatch(format!(
                    "tree splits on feature {f} but width is {feature_width}"
                )));
            }
        }
        Ok(Model {
            base_score,
            learning_rate,
            feature_width,
            trees,
            training_loss: Vec::new(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl Classifier for Model {
    fn feature_width(&self) -> usize {
        self.feature_width
    }

    fn margin(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.output(row)).sum();
        self.base_score + self.learning_rate * sum
    }
}

pub fn predict_margin<C: Classifier + ?Sized>(model: &C, row: &[f64]) -> Result<f64> {
    model.predict_margin(row)
}

pub fn predict<C: Classifier + ?Sized>(model: &C, row: &[f64]) -> Result<u8> {
    model.predict(row)
}

#[inline]
fn sigmoid(f: f64) -> f64 {
    if f >= 0.0 {
        1.0 / (1.0 + (-f).exp())
    } else {
        let e = f.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^f) - y f`, computed without overflow.
#[inline]
fn logistic_loss(label: u8, f: f64) -> f64 {
    f.max(0.0) + (-f.abs()).exp().ln_1p() - f64::from(label) * f
}

fn mean_loss(labels: &[u8], margins: &[f64]) -> f64 {
    labels.iter().zip(margins).map(|(&y, &f)| logistic_loss(y, f)).sum::<f64>() / labels.len() as f64
}

/// Trains a boosted-trees model on `data`.
///
/// The built-in learner is fully deterministic and draws no random numbers;
/// `seed` exists for interface parity with other learners.
pub fn train(data: &LabeledDataset, params: &GbtParams, _seed: u64) -> Result<Model> {
    params.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let (zeros, ones) = data.class_counts();
    if ones == 0 {
        return Err(Error::SingleClass(0));
    }
    if zeros == 0 {
        return Err(Error::SingleClass(1));
    }
    let n = data.len();
    let width = data.width();
    let x = data.features();
    let labels = data.labels();

    let sorted: Vec<Vec<u32>> = (0..width)
        .map(|f| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| {
                x[a as usize * width + f]
                    .total_cmp(&x[b as usize * width + f])
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect();

    let prior = ones as f64 / n as f64;
    let base_score = (prior / (1.0 - prior)).ln();
    let mut margins = vec![base_score; n];
    let mut loss = mean_loss(labels, &margins);
    let mut model = Model::new(base_score, params.learning_rate, width, Vec::new())?;
    model.training_loss.push(loss);

    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut outputs = vec![0.0; n];
    for _ in 0..params.rounds {
        for i in 0..n {
            let p = sigmoid(margins[i]);
            grad[i] = p - f64::from(labels[i]);
            hess[i] = p * (1.0 - p);
        }
        let mut tree = grow_tree(x, width, &sorted, &grad, &hess, params);
        for (i, out) in outputs.iter_mut().enumerate() {
            *out = tree.output(&x[i * width..(i + 1) * width]);
        }

        // Shrink the step until the training loss does not increase.
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let candidate: Vec<f64> = margins
                .iter()
                .zip(&outputs)
                .map(|(m, o)| m + params.learning_rate * scale * o)
                .collect();
            let new_loss = mean_loss(labels, &candidate);
            if new_loss <= loss {
                accepted = Some((candidate, new_loss));
                break;
            }
            scale *= 0.5;
        }
        let Some((candidate, new_loss)) = accepted else {
            break;
        };
        if scale != 1.0 {
            tree.scale(scale);
        }
        margins = candidate;
        loss = new_loss;
        model.trees.push(tree);
        model.training_loss.push(loss);
    }
    Ok(model)
}

#[derive(Clone, Copy)]
struct Stats {
    g: f64,
    h: f64,
    count: usize,
}

#[derive(Clone, Copy)]
struct SplitChoice {
    gain: f64,
    feature: usize,
    threshold: f64,
}

struct ScanState {
    g: f64,
    h: f64,
    count: usize,
    last: f64,
}

const UNASSIGNED: u32 = u32::MAX;

/// Midpoint strictly above `lo` and at most `hi`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid > lo && mid <= hi {
        mid
    } else {
        hi
    }
}

/// Grows one tree level by level. Each level makes a single pass over every
/// presorted feature column, scanning all open nodes at once.
fn grow_tree(
    x: &[f64],
    width: usize,
    sorted: &[Vec<u32>],
    grad: &[f64],
    hess: &[f64],
    params: &GbtParams,
) -> Tree {
    let n = grad.len();
    let lambda = params.l2_reg;
    let score = |s: &Stats| {
        let denom = s.h + lambda;
        if denom > 0.0 {
            s.g * s.g / denom
        } else {
            0.0
        }
    };
    let weight = |s: &Stats| {
        let denom = s.h + lambda;
        if denom > 0.0 {
            -s.g / denom
        } else {
            0.0
        }
    };

    let mut nodes: Vec<TreeNode> = vec![TreeNode::Leaf { weight: 0.0 }];
    // Open nodes: (slot in `nodes`, stats).
    let mut open: Vec<(usize, Stats)> = vec![(
        0,
        Stats {
            g: grad.iter().sum(),
            h: hess.iter().sum(),
            count: n,
        },
    )];
    let mut node_of = vec![0u32; n];

    for depth in 0..params.max_depth {
        if open.is_empty() {
            break;
        }
        // A split with zero gain can still pay off one level down (XOR is the
        // classic case), so it is accepted when a deeper level remains.
        let accepts = |gain: f64, current: Option<SplitChoice>| match current {
            Some(b) => gain > b.gain,
            None => gain > 0.0 || (gain == 0.0 && depth + 1 < params.max_depth),
        };
        let mut best: Vec<Option<SplitChoice>> = vec![None; open.len()];
        let mut state: Vec<ScanState> = Vec::with_capacity(open.len());
        for (f, order) in sorted.iter().enumerate() {
            state.clear();
            state.extend(open.iter().map(|_| ScanState {
                g: 0.0,
                h: 0.0,
                count: 0,
                last: f64::NEG_INFINITY,
            }));
            for &i in order {
                let i = i as usize;
                let k = node_of[i];
                if k == UNASSIGNED {
                    continue;
                }
                let k = k as usize;
                let v = x[i * width + f];
                let st = &mut state[k];
                let total = &open[k].1;
                if st.count > 0 && v > st.last {
                    let right_count = total.count - st.count;
                    if st.count >= params.min_leaf && right_count >= params.min_leaf {
                        let left = Stats {
                            g: st.g,
                            h: st.h,
                            count: st.count,
                        };
                        let right = Stats {
                            g: total.g - st.g,
                            h: total.h - st.h,
                            count: right_count,
                        };
                        let gain = 0.5 * (score(&left) + score(&right) - score(total));
                        if accepts(gain, best[k]) {
                            best[k] = Some(SplitChoice {
                                gain,
                                feature: f,
                                threshold: midpoint(st.last, v),
                            });
                        }
                    }
                }
                st.g += grad[i];
                st.h += hess[i];
                st.count += 1;
                st.last = v;
            }
        }

        // Apply the chosen splits; nodes without one become leaves.
        let mut child_of: Vec<Option<(u32, u32)>> = vec![None; open.len()];
        let mut next_open: Vec<(usize, Stats)> = Vec::new();
        for (k, (slot, stats)) in open.iter().enumerate() {
            match best[k] {
                Some(choice) => {
                    let left = nodes.len();
                    nodes.push(TreeNode::Leaf { weight: 0.0 });
                    nodes.push(TreeNode::Leaf { weight: 0.0 });
                    nodes[*slot] = TreeNode::Split {
                        feature: choice.feature,
                        threshold: choice.threshold,
                        left,
                        right: left + 1,
                    };
                    let empty = Stats { g: 0.0, h: 0.0, count: 0 };
                    child_of[k] = Some((next_open.len() as u32, next_open.len() as u32 + 1));
                    next_open.push((left, empty));
                    next_open.push((left + 1, empty));
                }
                None => {
                    nodes[*slot] = TreeNode::Leaf { weight: weight(stats) };
                }
            }
        }
        for i in 0..n {
            let k = node_of[i];
            if k == UNASSIGNED {
                continue;
            }
            node_of[i] = match (child_of[k as usize], &nodes[open[k as usize].0]) {
                (Some((l, r)), TreeNode::Split { feature, threshold, .. }) => {
                    let child = if x[i * width + feature] < *threshold { l } else { r };
                    let s = &mut next_open[child as usize].1;
                    s.g += grad[i];
                    s.h += hess[i];
                    s.count += 1;
                    child
                }
                _ => UNASSIGNED,
            };
        }
        open = next_open;
    }
    for (slot, stats) in &open {
        nodes[*slot] = TreeNode::Leaf { weight: weight(stats) };
    }
    Tree { nodes }
}

/// Mean 0-1 loss with a per-class breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub loss: f64,
    pub n: usize,
    /// Error rate among label-1 rows (0 when there are none).
    pub error_rate_ones: f64,
    /// Error rate among label-0 rows (0 when there are none).
    pub error_rate_zeros: f64,
    pub errors_ones: usize,
    pub errors_zeros: usize,
}

pub fn empirical_risk<C: Classifier + ?Sized>(model: &C, data: &LabeledDataset) -> Result<RiskReport> {
    if data.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    if data.width() != model.feature_width() {
        return Err(Error::DimMismatch(format!(
            "evaluation rows have {} features, model expects {}",
            data.width(),
            model.feature_width()
        )));
    }
    let (mut errors_ones, mut errors_zeros) = (0usize, 0usize);
    for (row, &label) in data.rows().zip(data.labels()) {
        let predicted = u8::from(model.margin(row) >= 0.0);
        if predicted != label {
            if label == 1 {
                errors_ones += 1;
            } else {
                errors_zeros += 1;
            }
        }
    }
    let (zeros, ones) = data.class_counts();
    let rate = |e: usize, c: usize| if c == 0 { 0.0 } else { e as f64 / c as f64 };
    Ok(RiskReport {
        loss: (errors_ones + errors_zeros) as f64 / data.len() as f64,
        n: data.len(),
        error_rate_ones: rate(errors_ones, ones),
        error_rate_zeros: rate(errors_zeros, zeros),
        errors_ones,
        errors_zeros,
    })
}
