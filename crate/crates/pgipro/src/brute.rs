//! Exhaustive simple-path enumeration. Exponential; meant for small graphs
//! and as an independent check of the search engine.

use pgipro_core::graph::{MultiObjectiveGraph, NodeIndex};
use pgipro_core::pareto::{filter_nondominated, ObjectiveVector};

/// Values of every simple source-target path, one per edge sequence.
pub fn all_simple_path_values(graph: &MultiObjectiveGraph, source: NodeIndex, target: NodeIndex) -> Vec<ObjectiveVector> {
    let mut out = Vec::new();
    let mut on_path = vec![false; graph.node_count()];
    let mut acc = ObjectiveVector::zeros(graph.objective_count());
    on_path[source.index()] = true;
    walk(graph, source, target, &mut on_path, &mut acc, &mut out);
    out
}

fn walk(
    graph: &MultiObjectiveGraph,
    at: NodeIndex,
    target: NodeIndex,
    on_path: &mut [bool],
    acc: &mut ObjectiveVector,
    out: &mut Vec<ObjectiveVector>,
) {
    if at == target {
        out.push(acc.clone());
        return;
    }
    for (_, e) in graph.outgoing(at) {
        if on_path[e.to.index()] {
            continue;
        }
        on_path[e.to.index()] = true;
        let before = acc.clone();
        acc.add_assign(&e.cost);
        walk(graph, e.to, target, on_path, acc, out);
        *acc = before;
        on_path[e.to.index()] = false;
    }
}

/// The Pareto front over all simple paths, sorted lexicographically.
pub fn brute_force_front(graph: &MultiObjectiveGraph, source: NodeIndex, target: NodeIndex) -> Vec<ObjectiveVector> {
    let mut front = filter_nondominated(&all_simple_path_values(graph, source, target)).expect("paths share the graph dimension");
    front.sort_by(|a, b| a.lex_cmp(b));
    front.dedup();
    front
}
