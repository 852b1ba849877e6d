//! Exact 1-nearest-neighbor search in Euclidean norm.
//!
//! [`NnIndex`] is a k-d tree with small leaf buckets. Queries return exactly
//! what [`nearest_bruteforce`] returns: the stored point with the smallest
//! squared distance, ties going to the smallest original row index.

use crate::{Error, Result};

const LEAF_SIZE: usize = 8;

/// Squared Euclidean distance. Both search paths use this exact function so
/// their results are bit-identical.
#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
fn better(d2: f64, idx: usize, best_d2: f64, best_idx: usize) -> bool {
    d2 < best_d2 || (d2 == best_d2 && idx < best_idx)
}

fn validate(points: &[f64], dim: usize) -> Result<usize> {
    if dim == 0 {
        return Err(Error::InvalidParam("point dimension must be positive".into()));
    }
    if points.is_empty() {
        return Err(Error::Empty("nearest-neighbor point set"));
    }
    if points.len() % dim != 0 {
        return Err(Error::DimMismatch(format!(
            "{} coordinates do not fill points of dimension {dim}",
            points.len()
        )));
    }
    if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: pos / dim,
            column: pos % dim,
        });
    }
    Ok(points.len() / dim)
}

/// Exhaustive scan over row-major `points` of dimension `query.len()`.
/// Returns `(row index, distance)`.
pub fn nearest_bruteforce(points: &[f64], query: &[f64]) -> Result<(usize, f64)> {
    let dim = query.len();
    validate(points, dim)?;
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, p) in points.chunks_exact(dim).enumerate() {
        let d2 = sq_dist(p, query);
        if better(d2, i, best.1, best.0) {
            best = (i, d2);
        }
    }
    Ok((best.0, best.1.sqrt()))
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Immutable k-d tree over a fixed point set.
#[derive(Debug, Clone)]
pub struct NnIndex {
    dim: usize,
    /// Points permuted into tree order, row-major.
    points: Vec<f64>,
    /// Original row index of each point in tree order.
    ids: Vec<usize>,
    nodes: Vec<Node>,
}

impl NnIndex {
    /// Builds the index over row-major `points` with `dim` coordinates each.
    pub fn build(points: &[f64], dim: usize) -> Result<Self> {
        let m = validate(points, dim)?;
        let mut ids: Vec<usize> = (0..m).collect();
        let mut nodes = Vec::new();
        build_node(points, dim, &mut ids, 0, m, &mut nodes);
        let ordered = ids
            .iter()
            .flat_map(|&i| &points[i * dim..(i + 1) * dim])
            .copied()
            .collect();
        Ok(NnIndex {
            dim,
            points: ordered,
            ids,
            nodes,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Nearest stored point to `query` as `(original row index, distance)`.
    pub fn nearest(&self, query: &[f64]) -> Result<(usize, f64)> {
        if query.len() != self.dim {
            return Err(Error::DimMismatch(format!(
                "query has {} coordinates, index has {}",
                query.len(),
                self.dim
            )));
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(0, query, &mut best);
        Ok((best.0, best.1.sqrt()))
    }

    fn search(&self, node: usize, q: &[f64], best: &mut (usize, f64)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for k in start..end {
                    let p = &self.points[k * self.dim..(k + 1) * self.dim];
                    let d2 = sq_dist(p, q);
                    let id = self.ids[k];
                    if better(d2, id, best.1, best.0) {
                        *best = (id, d2);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, best);
                // Every point on the far side is at least |diff| away along
                // `axis`. Equal bounds are still visited so ties by index
                // resolve the same way as the exhaustive scan.
                if diff * diff <= best.1 {
                    self.search(far, q, best);
                }
            }
        }
    }
}

/// Recursively splits `ids[start..end]` at the median of the widest axis.
/// Left receives coordinates `<= value`, right `>= value`.
fn build_node(
    points: &[f64],
    dim: usize,
    ids: &mut [usize],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let slot = nodes.len();
    nodes.push(Node::Leaf { start, end });
    if end - start <= LEAF_SIZE {
        return slot;
    }
    let coord = |i: usize, a: usize| points[i * dim + a];
    let axis = (0..dim)
        .map(|a| {
            let (lo, hi) = ids[start..end].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                (lo.min(coord(i, a)), hi.max(coord(i, a)))
            });
            (a, hi - lo)
        })
        .fold((0, -1.0), |acc, (a, spread)| if spread > acc.1 { (a, spread) } else { acc })
        .0;
    let mid = start + (end - start) / 2;
    ids[start..end].select_nth_unstable_by(mid - start, |&i, &j| {
        coord(i, axis).total_cmp(&coord(j, axis)).then(i.cmp(&j))
    });
    let value = coord(ids[mid], axis);
    let left = build_node(points, dim, ids, start, mid, nodes);
    let right = build_node(points, dim, ids, mid, end, nodes);
    nodes[slot] = Node::Split {
        axis,
        value,
        left,
        right,
    };
    slot
}
