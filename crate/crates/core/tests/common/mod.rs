#![allow(dead_code)]

use std::collections::BTreeSet;

use pgipro_core::graph::{GraphBuilder, MultiObjectiveGraph, NodeIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random digraph on `n` nodes with small non-negative integer costs. Node
/// 0 is the source and node `n - 1` the target; a random backbone path
/// keeps the target reachable most of the time.
pub fn random_graph(seed: u64, n: usize, m: usize, density: f64) -> MultiObjectiveGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GraphBuilder::with_objective_count(m).unwrap();
    for i in 0..n {
        b.add_node(format!("v{i}"), None).unwrap();
    }
    let cost = |rng: &mut ChaCha8Rng| (0..m).map(|_| rng.random_range(0..10) as f64).collect::<Vec<_>>();
    if rng.random_bool(0.9) {
        let mut prev = 0;
        for next in 1..n {
            if rng.random_bool(0.6) || next == n - 1 {
                b.add_edge(&format!("v{prev}"), &format!("v{next}"), cost(&mut rng)).unwrap();
                prev = next;
            }
        }
    }
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random_bool(density) {
                b.add_edge(&format!("v{u}"), &format!("v{v}"), cost(&mut rng)).unwrap();
            }
        }
    }
    b.build()
}

/// Values of all simple paths, by plain recursion over edges.
pub fn simple_path_values(g: &MultiObjectiveGraph, s: NodeIndex, t: NodeIndex) -> Vec<Vec<f64>> {
    fn go(
        g: &MultiObjectiveGraph,
        at: NodeIndex,
        t: NodeIndex,
        seen: &mut Vec<bool>,
        acc: Vec<f64>,
        out: &mut Vec<Vec<f64>>,
    ) {
        if at == t {
            out.push(acc);
            return;
        }
        for e in g.edges().iter().filter(|e| e.from == at) {
            if seen[e.to.0] {
                continue;
            }
            seen[e.to.0] = true;
            let next = acc.iter().zip(&e.cost).map(|(a, c)| a + c).collect();
            go(g, e.to, t, seen, next, out);
            seen[e.to.0] = false;
        }
    }
    let mut seen = vec![false; g.node_count()];
    seen[s.0] = true;
    let mut out = Vec::new();
    go(g, s, t, &mut seen, vec![0.0; g.objective_count()], &mut out);
    out
}

fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Pareto front by pairwise comparison, as a sorted set of integer-valued
/// vectors (costs in these tests are integers).
pub fn front_set(values: &[Vec<f64>]) -> BTreeSet<Vec<i64>> {
    values
        .iter()
        .filter(|v| !values.iter().any(|w| dominates(w, v)))
        .map(|v| v.iter().map(|x| *x as i64).collect())
        .collect()
}

pub fn as_key(v: &[f64]) -> Vec<i64> {
    v.iter().map(|x| *x as i64).collect()
}
