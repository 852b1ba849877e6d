//! Oracles shared by the integration tests and the acceptance suite. They
//! are written independently of the library code they check.

#![allow(dead_code)]

use ccit::ci_test::Decision;
use ccit::relations::{CausalGraph, Relation};

/// d-separation of `x` and `y` given `z`, via the moral graph of the
/// ancestral set of `{x, y} ∪ z`.
pub fn d_separated(g: &CausalGraph, x: usize, y: usize, z: &[usize]) -> bool {
    let n = g.len();
    let mut relevant = vec![false; n];
    let mut stack: Vec<usize> = z.iter().copied().chain([x, y]).collect();
    while let Some(v) = stack.pop() {
        if !relevant[v] {
            relevant[v] = true;
            stack.extend_from_slice(g.parents_of(v));
        }
    }
    let mut adj = vec![vec![false; n]; n];
    for v in (0..n).filter(|&v| relevant[v]) {
        let ps = g.parents_of(v);
        for &p in ps {
            adj[p][v] = true;
            adj[v][p] = true;
        }
        for &p in ps {
            for &q in ps {
                if p != q {
                    adj[p][q] = true;
                }
            }
        }
    }
    let blocked: Vec<bool> = (0..n).map(|v| z.contains(&v)).collect();
    let mut seen = vec![false; n];
    let mut stack = vec![x];
    seen[x] = true;
    while let Some(v) = stack.pop() {
        if v == y {
            return false;
        }
        for w in 0..n {
            if adj[v][w] && relevant[w] && !blocked[w] && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    true
}

/// Smallest set `S` that d-separates `x` from every node outside `S ∪ {x}`,
/// found by exhaustive search over subsets in increasing size. Panics if the
/// minimum is not unique.
pub fn minimal_separating_blanket(g: &CausalGraph, x: usize) -> Vec<usize> {
    let others: Vec<usize> = (0..g.len()).filter(|&v| v != x).collect();
    let m = others.len();
    for size in 0..=m {
        let mut found: Vec<Vec<usize>> = Vec::new();
        for mask in 0u32..(1 << m) {
            if mask.count_ones() as usize != size {
                continue;
            }
            let s: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).map(|i| others[i]).collect();
            if others.iter().filter(|v| !s.contains(v)).all(|&y| d_separated(g, x, y, &s)) {
                found.push(s);
            }
        }
        if !found.is_empty() {
            assert_eq!(found.len(), 1, "non-unique minimal blanket for node {x}");
            return found.pop().unwrap();
        }
    }
    unreachable!("the full set always separates")
}

/// Expected CI relations: `(x, y, S(x))` for every `x` in node order and
/// every `y` outside `S(x) ∪ {x}`.
pub fn oracle_ci_relations(g: &CausalGraph) -> Vec<Relation> {
    let names = g.names();
    let mut out = Vec::new();
    for x in 0..g.len() {
        let s = minimal_separating_blanket(g, x);
        for y in (0..g.len()).filter(|&y| y != x && !s.contains(&y)) {
            assert!(d_separated(g, x, y, &s));
            out.push(Relation {
                x: names[x].clone(),
                y: names[y].clone(),
                z: s.iter().map(|&v| names[v].clone()).collect(),
                label: Decision::Ci,
            });
        }
    }
    out
}

pub fn relation_is_d_separated(g: &CausalGraph, r: &Relation) -> bool {
    let x = g.index_of(&r.x).unwrap();
    let y = g.index_of(&r.y).unwrap();
    let z: Vec<usize> = r.z.iter().map(|n| g.index_of(n).unwrap()).collect();
    d_separated(g, x, y, &z)
}

/// Random DAG on `n` nodes named `v0..`: edge `i -> j` (i < j) with
/// probability `p`, then nodes relabeled by a shuffled order so that node
/// order and topological order differ.
pub fn random_dag(n: usize, p: f64, seed: u64) -> CausalGraph {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((names[perm[i]].clone(), names[perm[j]].clone()));
            }
        }
    }
    CausalGraph::new(&names, &edges).unwrap()
}

/// Exhaustive pairwise AUC with one-half credit for ties.
pub fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let (mut num, mut den) = (0u64, 0u64);
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] == 1 && labels[j] == 0 {
                den += 2;
                if si > sj {
                    num += 2;
                } else if si == sj {
                    num += 1;
                }
            }
        }
    }
    num as f64 / den as f64
}
