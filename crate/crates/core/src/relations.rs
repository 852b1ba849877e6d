//! Ground-truth relations from a causal DAG.
//!
//! CI relations: for each node X, conditioning on its Markov blanket Z makes X
//! independent of every node outside `Z ∪ {X}`. Non-CI relations: adjacent
//! nodes are dependent given any conditioning set, so a random edge plus a
//! random conditioning set is a known dependence.
//!
//! Graph files hold one `parent -> child` edge per line. A line with a single
//! name declares an isolated node; `#` starts a comment.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ci_test::Decision;
use crate::data::{Dataset, DimSpec, Table};
use crate::seed;
use crate::{Error, Result};

pub const DEFAULT_COND_SIZE: usize = 3;
pub const DEFAULT_NONCI_COUNT: usize = 50;

/// Bundled transcriptions of protein-signaling graphs used with the
/// flow-cytometry benchmark. Node names follow the common column names of
/// that dataset.
pub const BUNDLED_GRAPHS: &[(&str, &str)] = &[
    ("consensus", include_str!("../fixtures/sachs_consensus.graph")),
    ("sachs", include_str!("../fixtures/sachs_reconstructed.graph")),
];

pub fn bundled_graph(name: &str) -> Result<CausalGraph> {
    let text = BUNDLED_GRAPHS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Graph(format!("no bundled graph named {name:?}")))?;
    CausalGraph::parse(text)
}

/// A directed acyclic graph over named nodes. Node order is the order of
/// first appearance and fixes the order of every derived output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalGraph {
    names: Vec<String>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl CausalGraph {
    pub fn new<S: AsRef<str>>(nodes: &[S], edges: &[(S, S)]) -> Result<Self> {
        let mut g = CausalGraph {
            names: Vec::new(),
            parents: Vec::new(),
            children: Vec::new(),
        };
        let mut lookup = HashMap::new();
        for n in nodes {
            let n = n.as_ref();
            if lookup.contains_key(n) {
                return Err(Error::Graph(format!("duplicate node {n:?}")));
            }
            g.add_node(n, &mut lookup);
        }
        for (p, c) in edges {
            let p = *lookup
                .get(p.as_ref())
                .ok_or_else(|| Error::UnknownNode(p.as_ref().to_string()))?;
            let c = *lookup
                .get(c.as_ref())
                .ok_or_else(|| Error::UnknownNode(c.as_ref().to_string()))?;
            g.add_edge(p, c)?;
        }
        g.check_acyclic()?;
        Ok(g)
    }

    /// Parses the line-oriented graph format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut g = CausalGraph {
            names: Vec::new(),
            parents: Vec::new(),
            children: Vec::new(),
        };
        let mut lookup = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| Error::GraphSyntax { line: i + 1, message };
            let valid_name = |s: &str| !s.is_empty() && !s.contains(char::is_whitespace) && !s.contains("->");
            match line.split_once("->") {
                Some((p, c)) => {
                    let (p, c) = (p.trim(), c.trim());
                    if !valid_name(p) || !valid_name(c) {
                        return Err(syntax(format!("expected `parent -> child`, got {line:?}")));
                    }
                    let p = g.add_node(p, &mut lookup);
                    let c = g.add_node(c, &mut lookup);
                    g.add_edge(p, c).map_err(|e| syntax(e.to_string()))?;
                }
                None => {
                    if !valid_name(line) {
                        return Err(syntax(format!("expected a node name or an edge, got {line:?}")));
                    }
                    g.add_node(line, &mut lookup);
                }
            }
        }
        g.check_acyclic()?;
        Ok(g)
    }

    fn add_node(&mut self, name: &str, lookup: &mut HashMap<String, usize>) -> usize {
        if let Some(&i) = lookup.get(name) {
            return i;
        }
        self.names.push(name.to_string());
        self.parents.push(Vec::new());
        self.children.push(Vec::new());
        lookup.insert(name.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }

    fn add_edge(&mut self, p: usize, c: usize) -> Result<()> {
        if p == c {
            return Err(Error::Graph(format!("self-loop on {:?}", self.names[p])));
        }
        if self.children[p].contains(&c) {
            return Err(Error::Graph(format!(
                "duplicate edge {} -> {}",
                self.names[p], self.names[c]
            )));
        }
        self.children[p].push(c);
        self.parents[c].push(p);
        Ok(())
    }

    fn check_acyclic(&self) -> Result<()> {
        // Kahn's algorithm.
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut stack: Vec<usize> = (0..self.len()).filter(|&v| indegree[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for &c in &self.children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    stack.push(c);
                }
            }
        }
        if seen == self.len() {
            Ok(())
        } else {
            let on_cycle = (0..self.len()).find(|&v| indegree[v] > 0).expect("cycle exists");
            Err(Error::Graph(format!(
                "graph has a directed cycle through {:?}",
                self.names[on_cycle]
            )))
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn parents_of(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children_of(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Edges as `(parent, child)` indices, ordered by parent then insertion.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|p| self.children[p].iter().map(move |&c| (p, c)))
            .collect()
    }

    fn blanket_mask(&self, v: usize) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        for &p in &self.parents[v] {
            mask[p] = true;
        }
        for &c in &self.children[v] {
            mask[c] = true;
            for &spouse in &self.parents[c] {
                mask[spouse] = true;
            }
        }
        mask[v] = false;
        mask
    }

    /// Node indices with every parent before its children; ties broken by
    /// node order.
    pub fn topological_order(&self) -> Vec<usize> {
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: std::collections::BTreeSet<usize> = (0..self.len()).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &self.children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        order
    }

    /// Writes the graph back in the line format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        // Declaring every node first preserves the node order on re-parsing.
        for name in &self.names {
            let _ = writeln!(out, "{name}");
        }
        for (p, c) in self.edges() {
            let _ = writeln!(out, "{} -> {}", self.names[p], self.names[c]);
        }
        out
    }
}

/// Parents, children and the children's other parents of `node`, in node order.
pub fn markov_blanket(g: &CausalGraph, node: &str) -> Result<Vec<String>> {
    let v = g.index_of(node)?;
    Ok(g.blanket_mask(v)
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| g.names[i].clone())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub x: String,
    pub y: String,
    pub z: Vec<String>,
    pub label: Decision,
}

/// One CI relation `(X, Y, blanket(X))` per node X and per node Y outside
/// the blanket. Both orientations of a pair may appear.
pub fn gen_ci_relations(g: &CausalGraph) -> Vec<Relation> {
    let mut out = Vec::new();
    for x in 0..g.len() {
        let mask = g.blanket_mask(x);
        let z: Vec<String> = (0..g.len()).filter(|&i| mask[i]).map(|i| g.names[i].clone()).collect();
        for y in (0..g.len()).filter(|&y| y != x && !mask[y]) {
            out.push(Relation {
                x: g.names[x].clone(),
                y: g.names[y].clone(),
                z: z.clone(),
                label: Decision::Ci,
            });
        }
    }
    out
}

/// `count` relations, each from a uniformly drawn edge (orientation chosen by
/// a fair coin) and a uniform `cond_size`-subset of the other nodes. Draws are
/// independent, so duplicates can occur.
pub fn gen_nonci_relations(g: &CausalGraph, count: usize, cond_size: usize, seed: u64) -> Result<Vec<Relation>> {
    let edges = g.edges();
    if edges.is_empty() {
        return Err(Error::Graph("non-CI relations need at least one edge".into()));
    }
    if g.len() < cond_size + 2 {
        return Err(Error::Graph(format!(
            "conditioning sets of size {cond_size} need at least {} nodes, graph has {}",
            cond_size + 2,
            g.len()
        )));
    }
    let mut rng = seed::rng(seed, seed::stream::RELATIONS);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let (p, c) = edges[rng.random_range(0..edges.len())];
        let (x, y) = if rng.random::<bool>() { (p, c) } else { (c, p) };
        let rest: Vec<usize> = (0..g.len()).filter(|&v| v != x && v != y).collect();
        let mut picked: Vec<usize> = sample(&mut rng, rest.len(), cond_size).into_iter().map(|i| rest[i]).collect();
        picked.sort_unstable();
        out.push(Relation {
            x: g.names[x].clone(),
            y: g.names[y].clone(),
            z: picked.into_iter().map(|i| g.names[i].clone()).collect(),
            label: Decision::NotCi,
        });
    }
    Ok(out)
}

/// Dataset for a relation: X and Y columns plus the Z columns sorted by name.
/// Relations with an empty conditioning set are rejected.
pub fn slice_relation(table: &Table, r: &Relation) -> Result<Dataset> {
    if r.z.is_empty() {
        return Err(Error::InvalidParam(format!(
            "relation ({}, {}) has an empty conditioning set",
            r.x, r.y
        )));
    }
    let mut z = r.z.clone();
    z.sort();
    let mut cols = vec![table.column_index(&r.x)?, table.column_index(&r.y)?];
    for name in &z {
        cols.push(table.column_index(name)?);
    }
    table.to_dataset(&cols, DimSpec::new(1, 1, z.len())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> CausalGraph {
        CausalGraph::parse("A -> B\nB -> C\n").unwrap()
    }

    fn collider() -> CausalGraph {
        CausalGraph::parse("A -> C\nB -> C\n").unwrap()
    }

    #[test]
    fn parse_with_comments_and_isolated_nodes() {
        let g = CausalGraph::parse("# header\nA -> B  # trailing\n\nC\n").unwrap();
        assert_eq!(g.names(), &["A", "B", "C"]);
        assert_eq!(g.edges(), vec![(0, 1)]);
        assert_eq!(CausalGraph::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn parse_errors_report_line() {
        match CausalGraph::parse("A -> B\nA -> \n") {
            Err(Error::GraphSyntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match CausalGraph::parse("A -> B\nA -> B\n") {
            Err(Error::GraphSyntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(CausalGraph::parse("A -> A\n"), Err(Error::GraphSyntax { line: 1, .. })));
        assert!(matches!(CausalGraph::parse("two words\n"), Err(Error::GraphSyntax { line: 1, .. })));
    }

    #[test]
    fn cycles_are_rejected() {
        assert!(matches!(CausalGraph::parse("A -> B\nB -> C\nC -> A\n"), Err(Error::Graph(_))));
        assert!(CausalGraph::new(&["A", "B"], &[("A", "B"), ("B", "A")]).is_err());
        assert!(CausalGraph::new(&["A", "A"], &[]).is_err());
        assert!(matches!(
            CausalGraph::new(&["A"], &[("A", "Q")]),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn topological_order_respects_edges() {
        let g = CausalGraph::parse("C -> B\nB -> A\nD\n").unwrap();
        let order = g.topological_order();
        assert_eq!(order, vec![0, 1, 2, 3]);
        let pos = |v: usize| order.iter().position(|&o| o == v).unwrap();
        for (p, c) in g.edges() {
            assert!(pos(p) < pos(c));
        }
    }

    #[test]
    fn blanket_chain() {
        assert_eq!(markov_blanket(&chain(), "A").unwrap(), vec!["B"]);
        assert_eq!(markov_blanket(&chain(), "B").unwrap(), vec!["A", "C"]);
    }

    #[test]
    fn blanket_collider_includes_spouse() {
        assert_eq!(markov_blanket(&collider(), "A").unwrap(), vec!["C", "B"]);
    }

    #[test]
    fn blanket_isolated_and_unknown() {
        let g = CausalGraph::parse("A -> B\nC\n").unwrap();
        assert!(markov_blanket(&g, "C").unwrap().is_empty());
        assert!(matches!(markov_blanket(&g, "Q"), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn ci_relations_chain() {
        let rels = gen_ci_relations(&chain());
        let got: Vec<(&str, &str, Vec<&str>)> = rels
            .iter()
            .map(|r| (r.x.as_str(), r.y.as_str(), r.z.iter().map(String::as_str).collect()))
            .collect();
        assert_eq!(got, vec![("A", "C", vec!["B"]), ("C", "A", vec!["B"])]);
        assert!(rels.iter().all(|r| r.label == Decision::Ci));
    }

    #[test]
    fn ci_relations_complete_dag_is_empty() {
        let g = CausalGraph::parse("A -> B\nA -> C\nB -> C\n").unwrap();
        assert!(gen_ci_relations(&g).is_empty());
    }

    #[test]
    fn ci_relations_no_edges() {
        let g = CausalGraph::parse("A\nB\nC\nD\n").unwrap();
        let rels = gen_ci_relations(&g);
        assert_eq!(rels.len(), 4 * 3);
        assert!(rels.iter().all(|r| r.z.is_empty()));
    }

    #[test]
    fn nonci_forced_choice() {
        let g = CausalGraph::parse("A -> B\nC\nD\nE\n").unwrap();
        let rels = gen_nonci_relations(&g, 20, 3, 1).unwrap();
        assert_eq!(rels.len(), 20);
        for r in &rels {
            let mut pair = [r.x.as_str(), r.y.as_str()];
            pair.sort();
            assert_eq!(pair, ["A", "B"]);
            assert_eq!(r.z, vec!["C", "D", "E"]);
            assert_eq!(r.label, Decision::NotCi);
        }
    }

    #[test]
    fn nonci_errors_and_determinism() {
        assert!(gen_nonci_relations(&CausalGraph::parse("A\nB\nC\nD\nE\n").unwrap(), 1, 3, 0).is_err());
        assert!(gen_nonci_relations(&chain(), 1, 3, 0).is_err());
        let g = bundled_graph("sachs").unwrap();
        assert_eq!(
            gen_nonci_relations(&g, 50, 3, 8).unwrap(),
            gen_nonci_relations(&g, 50, 3, 8).unwrap()
        );
    }

    #[test]
    fn bundled_graphs_parse() {
        for (name, _) in BUNDLED_GRAPHS {
            let g = bundled_graph(name).unwrap();
            assert_eq!(g.len(), 11, "{name}");
            assert!(gen_ci_relations(&g).iter().all(|r| !r.z.is_empty()), "{name}");
        }
        assert!(bundled_graph("nope").is_err());
    }

    #[test]
    fn slice_relation_mapping() {
        let table = Table::new(
            vec!["C".into(), "A".into(), "B".into()],
            vec![3.0, 1.0, 2.0, 30.0, 10.0, 20.0],
        )
        .unwrap();
        let r = Relation {
            x: "A".into(),
            y: "C".into(),
            z: vec!["B".into()],
            label: Decision::Ci,
        };
        let ds = slice_relation(&table, &r).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dims(), DimSpec::new(1, 1, 1).unwrap());
        assert_eq!(ds.row(0), &[1.0, 3.0, 2.0]);
        assert_eq!(ds.row(1), &[10.0, 30.0, 20.0]);

        let empty = Relation { z: vec![], ..r.clone() };
        assert!(slice_relation(&table, &empty).is_err());
        let missing = Relation { x: "Q".into(), ..r };
        assert!(matches!(slice_relation(&table, &missing), Err(Error::MissingColumn(_))));
    }
}
