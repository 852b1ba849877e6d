mod common;

use ccit::relations::{bundled_graph, gen_ci_relations, gen_nonci_relations, markov_blanket, CausalGraph};
use common::{d_separated, oracle_ci_relations, random_dag, relation_is_d_separated};

fn sep(g: &CausalGraph, x: &str, y: &str, z: &[&str]) -> bool {
    let z: Vec<usize> = z.iter().map(|n| g.index_of(n).unwrap()).collect();
    d_separated(g, g.index_of(x).unwrap(), g.index_of(y).unwrap(), &z)
}

#[test]
fn oracle_sanity_on_three_node_graphs() {
    let chain = CausalGraph::parse("A -> B\nB -> C\n").unwrap();
    assert!(!sep(&chain, "A", "C", &[]));
    assert!(sep(&chain, "A", "C", &["B"]));
    let collider = CausalGraph::parse("A -> C\nB -> C\n").unwrap();
    assert!(sep(&collider, "A", "B", &[]));
    assert!(!sep(&collider, "A", "B", &["C"]));
    let fork = CausalGraph::parse("B -> A\nB -> C\n").unwrap();
    assert!(!sep(&fork, "A", "C", &[]));
    assert!(sep(&fork, "A", "C", &["B"]));
}

#[test]
fn ci_relations_match_oracle_on_random_dags() {
    for seed in 0..300 {
        let n = 2 + (seed as usize % 5);
        let g = random_dag(n, 0.45, seed);
        assert_eq!(gen_ci_relations(&g), oracle_ci_relations(&g), "seed {seed}\n{}", g.to_text());
    }
}

#[test]
fn blankets_match_oracle_on_bundled_graphs() {
    for name in ["consensus", "sachs"] {
        let g = bundled_graph(name).unwrap();
        for x in 0..g.len() {
            let want: Vec<String> = common::minimal_separating_blanket(&g, x)
                .into_iter()
                .map(|v| g.names()[v].clone())
                .collect();
            assert_eq!(markov_blanket(&g, &g.names()[x]).unwrap(), want, "{name}: {}", g.names()[x]);
        }
        let ci = gen_ci_relations(&g);
        assert!(ci.len() >= 60, "{name}: only {} CI relations", ci.len());
        assert!(ci.iter().all(|r| relation_is_d_separated(&g, r)));
    }
}

#[test]
fn nonci_relations_are_never_d_separated() {
    for seed in 0..100 {
        let g = random_dag(6, 0.5, 1000 + seed);
        if g.edges().is_empty() {
            continue;
        }
        for r in gen_nonci_relations(&g, 20, 2, seed).unwrap() {
            assert!(!relation_is_d_separated(&g, &r), "{r:?}");
        }
    }
    let g = bundled_graph("sachs").unwrap();
    for r in gen_nonci_relations(&g, 200, 3, 5).unwrap() {
        assert_eq!(r.z.len(), 3);
        assert!(!r.z.contains(&r.x) && !r.z.contains(&r.y));
        assert!(!relation_is_d_separated(&g, &r));
    }
}
