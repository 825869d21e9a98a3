//! Multi-objective graph model, path evaluation and single-objective
//! Dijkstra searches.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pareto::ObjectiveVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("a graph needs at least two objectives, found {0}")]
    TooFewObjectives(usize),
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("edge references unknown node `{0}`")]
    MissingNode(String),
    #[error("edge {from} -> {to} has {found} costs, expected {expected}")]
    DimensionMismatch {
        from: String,
        to: String,
        expected: usize,
        found: usize,
    },
    #[error("edge {from} -> {to} has a negative cost in objective {objective}")]
    NegativeCost {
        from: String,
        to: String,
        objective: usize,
    },
    #[error("edge {from} -> {to} has a non-finite cost in objective {objective}")]
    NonFiniteCost {
        from: String,
        to: String,
        objective: usize,
    },
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("node `{0}` has an invalid coordinate")]
    InvalidCoordinate(String),
    #[error("no edge between consecutive nodes `{from}` and `{to}`")]
    NotAPath { from: String, to: String },
    #[error("unknown node index {0}")]
    UnknownIndex(usize),
    #[error("objective index {index} out of range for {m} objectives")]
    ObjectiveOutOfRange { index: usize, m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeIndex(pub usize);

impl NodeIndex {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeIndex(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveMeta {
    pub name: String,
    pub unit: String,
}

impl ObjectiveMeta {
    pub fn new(name: impl Into<String>, unit: impl Into<String>) -> Self {
        ObjectiveMeta {
            name: name.into(),
            unit: unit.into(),
        }
    }
}

/// Display-only position, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coordinate {
    pub lon: f64,
    pub lat: f64,
}

impl Coordinate {
    fn is_valid(&self) -> bool {
        (-180.0..=180.0).contains(&self.lon) && (-90.0..=90.0).contains(&self.lat)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    pub coordinate: Option<Coordinate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: NodeIndex,
    pub to: NodeIndex,
    pub cost: Vec<f64>,
}

/// Directed multigraph with non-negative `m`-dimensional edge costs.
///
/// Immutable once built; share it behind an `Arc` for concurrent readers.
#[derive(Debug, Clone)]
pub struct MultiObjectiveGraph {
    objectives: Vec<ObjectiveMeta>,
    nodes: Vec<NodeRecord>,
    ids: BTreeMap<String, NodeIndex>,
    edges: Vec<Edge>,
    outgoing: Vec<Vec<EdgeIndex>>,
    incoming: Vec<Vec<EdgeIndex>>,
}

/// Incremental, validating constructor for [`MultiObjectiveGraph`].
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    graph: MultiObjectiveGraph,
}

impl GraphBuilder {
    pub fn new(objectives: Vec<ObjectiveMeta>) -> Result<Self, GraphError> {
        if objectives.len() < 2 {
            return Err(GraphError::TooFewObjectives(objectives.len()));
        }
        Ok(GraphBuilder {
            graph: MultiObjectiveGraph {
                objectives,
                nodes: Vec::new(),
                ids: BTreeMap::new(),
                edges: Vec::new(),
                outgoing: Vec::new(),
                incoming: Vec::new(),
            },
        })
    }

    /// Convenience for tests and synthetic graphs: objectives named `obj_i`.
    pub fn with_objective_count(m: usize) -> Result<Self, GraphError> {
        Self::new(
            (0..m)
                .map(|i| ObjectiveMeta::new(alloc::format!("obj_{i}"), ""))
                .collect(),
        )
    }

    pub fn add_node(
        &mut self,
        id: impl Into<String>,
        coordinate: Option<Coordinate>,
    ) -> Result<NodeIndex, GraphError> {
        let id = id.into();
        if self.graph.ids.contains_key(&id) {
            return Err(GraphError::DuplicateNode(id));
        }
        if let Some(c) = coordinate {
            if !c.is_valid() {
                return Err(GraphError::InvalidCoordinate(id));
            }
        }
        let idx = NodeIndex(self.graph.nodes.len());
        self.graph.ids.insert(id.clone(), idx);
        self.graph.nodes.push(NodeRecord { id, coordinate });
        self.graph.outgoing.push(Vec::new());
        self.graph.incoming.push(Vec::new());
        Ok(idx)
    }

    pub fn add_edge(&mut self, from: &str, to: &str, cost: Vec<f64>) -> Result<EdgeIndex, GraphError> {
        let g = &mut self.graph;
        let f = *g
            .ids
            .get(from)
            .ok_or_else(|| GraphError::MissingNode(from.into()))?;
        let t = *g.ids.get(to).ok_or_else(|| GraphError::MissingNode(to.into()))?;
        if f == t {
            return Err(GraphError::SelfLoop(from.into()));
        }
        let m = g.objectives.len();
        if cost.len() != m {
            return Err(GraphError::DimensionMismatch {
                from: from.into(),
                to: to.into(),
                expected: m,
                found: cost.len(),
            });
        }
        for (objective, c) in cost.iter().enumerate() {
            if !c.is_finite() {
                return Err(GraphError::NonFiniteCost {
                    from: from.into(),
                    to: to.into(),
                    objective,
                });
            }
            if *c < 0.0 {
                return Err(GraphError::NegativeCost {
                    from: from.into(),
                    to: to.into(),
                    objective,
                });
            }
        }
        let e = EdgeIndex(g.edges.len());
        g.edges.push(Edge { from: f, to: t, cost });
        g.outgoing[f.0].push(e);
        g.incoming[t.0].push(e);
        Ok(e)
    }

    pub fn build(self) -> MultiObjectiveGraph {
        self.graph
    }
}

/// A source-to-target route and its summed cost vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<NodeIndex>,
    pub edges: Vec<EdgeIndex>,
    pub value: ObjectiveVector,
}

impl Path {
    pub fn node_ids<'g>(&self, g: &'g MultiObjectiveGraph) -> Vec<&'g str> {
        self.nodes.iter().map(|&n| g.node(n).id.as_str()).collect()
    }
}

impl MultiObjectiveGraph {
    pub fn objective_count(&self) -> usize {
        self.objectives.len()
    }

    pub fn objectives(&self) -> &[ObjectiveMeta] {
        &self.objectives
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn node(&self, n: NodeIndex) -> &NodeRecord {
        &self.nodes[n.0]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeIndex) -> &Edge {
        &self.edges[e.0]
    }

    pub fn lookup(&self, id: &str) -> Option<NodeIndex> {
        self.ids.get(id).copied()
    }

    /// Outgoing edges in insertion order.
    pub fn outgoing(&self, n: NodeIndex) -> impl Iterator<Item = (EdgeIndex, &Edge)> + '_ {
        self.outgoing[n.0].iter().map(move |&e| (e, &self.edges[e.0]))
    }

    pub fn incoming(&self, n: NodeIndex) -> impl Iterator<Item = (EdgeIndex, &Edge)> + '_ {
        self.incoming[n.0].iter().map(move |&e| (e, &self.edges[e.0]))
    }

    fn check_node(&self, n: NodeIndex) -> Result<(), GraphError> {
        if n.0 < self.nodes.len() {
            Ok(())
        } else {
            Err(GraphError::UnknownIndex(n.0))
        }
    }

    /// Sum of edge costs along a node sequence.
    ///
    /// Between parallel edges the first inserted one is taken; use
    /// [`MultiObjectiveGraph::edge_path_value`] when the exact edges matter.
    pub fn path_value(&self, sequence: &[NodeIndex]) -> Result<ObjectiveVector, GraphError> {
        let mut value = ObjectiveVector::zeros(self.objective_count());
        for &n in sequence {
            self.check_node(n)?;
        }
        for pair in sequence.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let edge = self
                .outgoing(a)
                .find(|(_, e)| e.to == b)
                .ok_or_else(|| GraphError::NotAPath {
                    from: self.nodes[a.0].id.clone(),
                    to: self.nodes[b.0].id.clone(),
                })?;
            value.add_assign(&edge.1.cost);
        }
        Ok(value)
    }

    /// [`MultiObjectiveGraph::path_value`] keyed by node id strings.
    pub fn path_value_by_ids(&self, ids: &[&str]) -> Result<ObjectiveVector, GraphError> {
        let seq = ids
            .iter()
            .map(|id| self.lookup(id).ok_or_else(|| GraphError::MissingNode((*id).into())))
            .collect::<Result<Vec<_>, _>>()?;
        self.path_value(&seq)
    }

    pub fn edge_path_value(&self, edges: &[EdgeIndex]) -> ObjectiveVector {
        let mut value = ObjectiveVector::zeros(self.objective_count());
        for &e in edges {
            value.add_assign(&self.edges[e.0].cost);
        }
        value
    }

    /// Builds a [`Path`] from a sequence of edges, checking that they chain.
    pub fn path_from_edges(&self, edges: Vec<EdgeIndex>, source: NodeIndex) -> Result<Path, GraphError> {
        let mut nodes = vec![source];
        for &e in &edges {
            let edge = self.edges.get(e.0).ok_or(GraphError::UnknownIndex(e.0))?;
            let last = *nodes.last().unwrap();
            if edge.from != last {
                return Err(GraphError::NotAPath {
                    from: self.nodes[last.0].id.clone(),
                    to: self.nodes[edge.from.0].id.clone(),
                });
            }
            nodes.push(edge.to);
        }
        let value = self.edge_path_value(&edges);
        Ok(Path { nodes, edges, value })
    }

    /// Nodes reachable from `source` that can also reach `target`.
    pub fn route_nodes(&self, source: NodeIndex, target: NodeIndex) -> Vec<bool> {
        let sweep = |start: NodeIndex, forward: bool| {
            let mut seen = vec![false; self.node_count()];
            let mut stack = vec![start];
            seen[start.index()] = true;
            while let Some(n) = stack.pop() {
                let next: Vec<NodeIndex> = if forward {
                    self.outgoing(n).map(|(_, e)| e.to).collect()
                } else {
                    self.incoming(n).map(|(_, e)| e.from).collect()
                };
                for m in next {
                    if !seen[m.index()] {
                        seen[m.index()] = true;
                        stack.push(m);
                    }
                }
            }
            seen
        };
        let ahead = sweep(source, true);
        let behind = sweep(target, false);
        ahead.iter().zip(&behind).map(|(a, b)| *a && *b).collect()
    }

    /// A per-objective upper bound on the cost of any simple source-target
    /// path: the sum of the `k - 1` largest edge costs among edges between
    /// route nodes, where `k` is the number of route nodes.
    pub fn simple_path_cost_bound(&self, source: NodeIndex, target: NodeIndex) -> Vec<f64> {
        let on_route = self.route_nodes(source, target);
        let k = on_route.iter().filter(|x| **x).count();
        (0..self.objective_count())
            .map(|j| {
                let mut costs: Vec<f64> = self
                    .edges
                    .iter()
                    .filter(|e| on_route[e.from.index()] && on_route[e.to.index()])
                    .map(|e| e.cost[j])
                    .collect();
                costs.sort_by(|a, b| b.total_cmp(a));
                costs.iter().take(k.saturating_sub(1)).sum()
            })
            .collect()
    }

    /// Per-node minimum cost of reaching `target` in one objective, by
    /// Dijkstra over the reversed edges. Unreachable nodes get `+inf`.
    pub fn reverse_lower_bounds(&self, target: NodeIndex, objective: usize) -> Result<Vec<f64>, GraphError> {
        self.check_node(target)?;
        let m = self.objective_count();
        if objective >= m {
            return Err(GraphError::ObjectiveOutOfRange { index: objective, m });
        }
        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        dist[target.0] = 0.0;
        heap.push(MinScalar(0.0, target.0));
        while let Some(MinScalar(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for (_, e) in self.incoming(NodeIndex(u)) {
                let nd = d + e.cost[objective];
                if nd < dist[e.from.0] {
                    dist[e.from.0] = nd;
                    heap.push(MinScalar(nd, e.from.0));
                }
            }
        }
        Ok(dist)
    }

    /// Lower-bound tables for every objective toward `target`.
    pub fn lower_bounds(&self, target: NodeIndex) -> Result<LowerBounds, GraphError> {
        let m = self.objective_count();
        let per_objective = (0..m)
            .map(|j| self.reverse_lower_bounds(target, j))
            .collect::<Result<Vec<_>, _>>()?;
        let n = self.nodes.len();
        let mut flat = vec![0.0; n * m];
        for (j, table) in per_objective.iter().enumerate() {
            for (node, b) in table.iter().enumerate() {
                flat[node * m + j] = *b;
            }
        }
        Ok(LowerBounds { m, flat })
    }

    /// Shortest path under a lexicographic order that ranks `primary` first
    /// and the remaining objectives by index. The result minimizes
    /// `primary` and is Pareto-optimal.
    pub fn lexicographic_shortest_path(
        &self,
        source: NodeIndex,
        target: NodeIndex,
        primary: usize,
    ) -> Result<Option<Path>, GraphError> {
        self.check_node(source)?;
        self.check_node(target)?;
        let m = self.objective_count();
        if primary >= m {
            return Err(GraphError::ObjectiveOutOfRange { index: primary, m });
        }
        let order: Vec<usize> = core::iter::once(primary).chain((0..m).filter(|&j| j != primary)).collect();
        let key = |v: &[f64]| -> Vec<f64> { order.iter().map(|&j| v[j]).collect() };

        let n = self.nodes.len();
        let mut best: Vec<Option<Vec<f64>>> = vec![None; n];
        let mut parent: Vec<Option<EdgeIndex>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        best[source.0] = Some(vec![0.0; m]);
        heap.push(MinLex(vec![0.0; m], source.0));
        while let Some(MinLex(k, u)) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            if u == target.0 {
                break;
            }
            let gu = best[u].clone().unwrap();
            for (ei, e) in self.outgoing(NodeIndex(u)) {
                if done[e.to.0] {
                    continue;
                }
                let gv: Vec<f64> = gu.iter().zip(&e.cost).map(|(a, b)| a + b).collect();
                let kv = key(&gv);
                let better = match &best[e.to.0] {
                    None => true,
                    Some(cur) => crate::pareto::lex_cmp(&kv, &key(cur)) == Ordering::Less,
                };
                if better {
                    best[e.to.0] = Some(gv);
                    parent[e.to.0] = Some(ei);
                    heap.push(MinLex(kv, e.to.0));
                }
            }
            let _ = k;
        }
        if best[target.0].is_none() {
            return Ok(None);
        }
        let mut edges = Vec::new();
        let mut cur = target;
        while cur != source {
            let e = parent[cur.0].expect("reached node has a parent edge");
            edges.push(e);
            cur = self.edges[e.0].from;
        }
        edges.reverse();
        self.path_from_edges(edges, source).map(Some)
    }

    /// The validated document form of this graph.
    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            objectives: self.objectives.clone(),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDocument {
                    id: n.id.clone(),
                    lon: n.coordinate.map(|c| c.lon),
                    lat: n.coordinate.map(|c| c.lat),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDocument {
                    from: self.nodes[e.from.0].id.clone(),
                    to: self.nodes[e.to.0].id.clone(),
                    costs: e.cost.clone(),
                })
                .collect(),
        }
    }

    /// Validates a parsed document into a graph.
    pub fn from_document(doc: GraphDocument) -> Result<Self, GraphError> {
        let mut b = GraphBuilder::new(doc.objectives)?;
        for n in doc.nodes {
            let coordinate = match (n.lon, n.lat) {
                (Some(lon), Some(lat)) => Some(Coordinate { lon, lat }),
                (None, None) => None,
                _ => return Err(GraphError::InvalidCoordinate(n.id)),
            };
            b.add_node(n.id, coordinate)?;
        }
        for e in doc.edges {
            b.add_edge(&e.from, &e.to, e.costs)?;
        }
        Ok(b.build())
    }
}

/// Node-major table of admissible per-objective costs-to-target.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBounds {
    m: usize,
    flat: Vec<f64>,
}

impl LowerBounds {
    pub fn at(&self, n: NodeIndex) -> &[f64] {
        &self.flat[n.0 * self.m..(n.0 + 1) * self.m]
    }

    pub fn objective(&self, n: NodeIndex, j: usize) -> f64 {
        self.flat[n.0 * self.m + j]
    }

    pub fn reaches_target(&self, n: NodeIndex) -> bool {
        self.at(n).iter().all(|b| b.is_finite())
    }
}

/// Serializable graph document: `objectives`, `nodes`, `edges`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub objectives: Vec<ObjectiveMeta>,
    pub nodes: Vec<NodeDocument>,
    pub edges: Vec<EdgeDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDocument {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDocument {
    pub from: String,
    pub to: String,
    #[serde(with = "crate::inf_float::vec")]
    pub costs: Vec<f64>,
}

#[derive(PartialEq)]
struct MinScalar(f64, usize);

impl Eq for MinScalar {}

impl Ord for MinScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for MinScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(PartialEq)]
struct MinLex(Vec<f64>, usize);

impl Eq for MinLex {}

impl Ord for MinLex {
    fn cmp(&self, other: &Self) -> Ordering {
        crate::pareto::lex_cmp(&other.0, &self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for MinLex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> MultiObjectiveGraph {
        let mut b = GraphBuilder::with_objective_count(2).unwrap();
        for id in ["a", "b", "c", "x"] {
            b.add_node(id, None).unwrap();
        }
        b.add_edge("a", "b", vec![2.0, 1.0]).unwrap();
        b.add_edge("b", "c", vec![3.0, 4.0]).unwrap();
        b.build()
    }

    #[test]
    fn path_values() {
        let g = chain();
        assert_eq!(g.path_value_by_ids(&["a"]).unwrap().as_slice(), &[0.0, 0.0]);
        assert_eq!(g.path_value_by_ids(&["a", "b", "c"]).unwrap().as_slice(), &[5.0, 5.0]);
        assert!(matches!(
            g.path_value_by_ids(&["a", "c"]),
            Err(GraphError::NotAPath { .. })
        ));
    }

    #[test]
    fn chain_lower_bounds() {
        let g = chain();
        let c = g.lookup("c").unwrap();
        let lb = g.reverse_lower_bounds(c, 0).unwrap();
        assert_eq!(&lb[..3], &[5.0, 3.0, 0.0]);
        assert!(lb[3].is_infinite());
        assert!(g.reverse_lower_bounds(c, 2).is_err());
    }

    #[test]
    fn builder_rejects_bad_edges() {
        let mut b = GraphBuilder::with_objective_count(2).unwrap();
        b.add_node("a", None).unwrap();
        b.add_node("b", None).unwrap();
        assert_eq!(
            b.add_edge("a", "c", vec![1.0, 1.0]),
            Err(GraphError::MissingNode("c".into()))
        );
        assert!(matches!(
            b.add_edge("a", "b", vec![1.0]),
            Err(GraphError::DimensionMismatch { expected: 2, found: 1, .. })
        ));
        assert!(matches!(
            b.add_edge("a", "b", vec![1.0, -1.0]),
            Err(GraphError::NegativeCost { objective: 1, .. })
        ));
        assert!(matches!(
            b.add_edge("a", "b", vec![f64::INFINITY, 1.0]),
            Err(GraphError::NonFiniteCost { objective: 0, .. })
        ));
        assert_eq!(b.add_edge("a", "a", vec![1.0, 1.0]), Err(GraphError::SelfLoop("a".into())));
        assert_eq!(b.add_node("a", None), Err(GraphError::DuplicateNode("a".into())));
        assert_eq!(
            b.add_node("z", Some(Coordinate { lon: 200.0, lat: 0.0 })),
            Err(GraphError::InvalidCoordinate("z".into()))
        );
        assert!(matches!(GraphBuilder::with_objective_count(1), Err(GraphError::TooFewObjectives(1))));
    }

    #[test]
    fn parallel_edges_are_kept() {
        let mut b = GraphBuilder::with_objective_count(2).unwrap();
        b.add_node("a", None).unwrap();
        b.add_node("b", None).unwrap();
        b.add_edge("a", "b", vec![1.0, 5.0]).unwrap();
        b.add_edge("a", "b", vec![5.0, 1.0]).unwrap();
        let g = b.build();
        assert_eq!(g.edge_count(), 2);
        let (a, bb) = (g.lookup("a").unwrap(), g.lookup("b").unwrap());
        let p1 = g.lexicographic_shortest_path(a, bb, 1).unwrap().unwrap();
        assert_eq!(p1.value.as_slice(), &[5.0, 1.0]);
        assert_eq!(p1.edges, vec![EdgeIndex(1)]);
    }

    #[test]
    fn lexicographic_tie_break_is_pareto_optimal() {
        let mut b = GraphBuilder::with_objective_count(2).unwrap();
        for id in ["s", "u", "v", "t"] {
            b.add_node(id, None).unwrap();
        }
        b.add_edge("s", "u", vec![1.0, 5.0]).unwrap();
        b.add_edge("u", "t", vec![1.0, 5.0]).unwrap();
        b.add_edge("s", "v", vec![1.0, 1.0]).unwrap();
        b.add_edge("v", "t", vec![1.0, 1.0]).unwrap();
        let g = b.build();
        let p = g
            .lexicographic_shortest_path(g.lookup("s").unwrap(), g.lookup("t").unwrap(), 0)
            .unwrap()
            .unwrap();
        assert_eq!(p.value.as_slice(), &[2.0, 2.0]);
        assert_eq!(p.node_ids(&g), vec!["s", "v", "t"]);
    }

    #[test]
    fn unreachable_target_has_no_path() {
        let g = chain();
        let r = g
            .lexicographic_shortest_path(g.lookup("a").unwrap(), g.lookup("x").unwrap(), 0)
            .unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn document_round_trip() {
        let g = chain();
        let back = MultiObjectiveGraph::from_document(g.to_document()).unwrap();
        assert_eq!(back.to_document(), g.to_document());
    }
}
