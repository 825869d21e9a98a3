//! The bundled Osdorp-like street graph.

use pgipro_core::graph::MultiObjectiveGraph;
use pgipro_core::pareto::ObjectiveVector;

use crate::brute::brute_force_front;
use crate::io::parse_graph;

pub const OSDORP_JSON: &str = include_str!("../fixtures/osdorp.json");
pub const OSDORP_SOURCE: &str = "O";
pub const OSDORP_TARGET: &str = "D";
/// Expected (length in metres, crossings) front between source and target.
pub const OSDORP_FRONT: [[f64; 2]; 7] = [
    [568.0, 8.0],
    [574.0, 7.0],
    [586.0, 6.0],
    [603.0, 5.0],
    [703.0, 4.0],
    [928.0, 3.0],
    [1335.0, 2.0],
];

pub fn osdorp() -> MultiObjectiveGraph {
    parse_graph(OSDORP_JSON).expect("bundled fixture parses")
}

pub fn osdorp_front() -> Vec<ObjectiveVector> {
    OSDORP_FRONT.iter().map(|&p| ObjectiveVector::from(p)).collect()
}

/// Brute-forces the fixture and compares against the expected front.
pub fn verify_osdorp(graph: &MultiObjectiveGraph) -> Result<Vec<ObjectiveVector>, Vec<ObjectiveVector>> {
    let (Some(s), Some(t)) = (graph.lookup(OSDORP_SOURCE), graph.lookup(OSDORP_TARGET)) else {
        return Err(Vec::new());
    };
    let front = brute_force_front(graph, s, t);
    if front == osdorp_front() {
        Ok(front)
    } else {
        Err(front)
    }
}
