//! Pareto oracles: multi-objective depth-first search over a graph, and a
//! lookup oracle over an explicitly known front.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::graph::{EdgeIndex, LowerBounds, MultiObjectiveGraph, NodeIndex, Path};
use crate::ipro::{OracleError, OracleOutcome, ParetoOracle, Solution};
use crate::pareto::{dominates_unchecked, lex_cmp, strictly_below_unchecked, ObjectiveVector, Region};

/// Scalarization used to order neighbors during the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GuidanceMode {
    /// Sum of normalized deviations from the target.
    Manhattan,
    /// Largest normalized deviation from the target.
    #[default]
    #[serde(rename = "chebyshev")]
    ChebyshevAsf,
}

/// Reference points for [`guidance_distance`]: the target `t`, the
/// Manhattan normalization bound `l` and the Chebyshev bound `u`.
#[derive(Debug, Clone, Copy)]
pub struct GuidanceReference<'a> {
    pub target: &'a [f64],
    pub lower: &'a [f64],
    pub upper: &'a [f64],
}

impl<'a> GuidanceReference<'a> {
    /// Target at the region's lower corner, normalized by the region extent.
    pub fn for_region(region: &'a Region) -> Self {
        GuidanceReference {
            target: region.lower(),
            lower: region.upper(),
            upper: region.upper(),
        }
    }
}

/// Normalized distance of `estimate` to the reference target. Lower is better.
///
/// A zero-width axis contributes 0 when the estimate sits on the target and
/// is an error otherwise.
pub fn guidance_distance(
    estimate: &[f64],
    mode: GuidanceMode,
    reference: GuidanceReference<'_>,
) -> Result<f64, OracleError> {
    let bound = match mode {
        GuidanceMode::Manhattan => reference.lower,
        GuidanceMode::ChebyshevAsf => reference.upper,
    };
    let mut acc = 0.0f64;
    for (i, ((c, t), b)) in estimate.iter().zip(reference.target).zip(bound).enumerate() {
        let num = (c - t).abs();
        let den = (b - t).abs();
        let term = if den == 0.0 {
            if num == 0.0 {
                0.0
            } else {
                return Err(OracleError::DegenerateAxis(i));
            }
        } else {
            num / den
        };
        match mode {
            GuidanceMode::Manhattan => acc += term,
            GuidanceMode::ChebyshevAsf => acc = acc.max(term),
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PruneReason {
    /// Some component of the estimate is worse than the incumbent's.
    ExceedsIncumbent,
    /// Some component of the estimate reaches the region's upper corner.
    TouchesRegionBound,
    /// A stored vector at the node dominates (or equals) the new cost.
    DominatedAtNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneDecision {
    Keep,
    Prune(PruneReason),
}

/// Per-node sets of mutually non-dominated cost vectors seen so far.
#[derive(Debug, Clone, Default)]
pub struct VisitedStore {
    per_node: Vec<Vec<Vec<f64>>>,
}

impl VisitedStore {
    pub fn new(node_count: usize) -> Self {
        VisitedStore {
            per_node: vec![Vec::new(); node_count],
        }
    }

    pub fn vectors(&self, node: NodeIndex) -> &[Vec<f64>] {
        &self.per_node[node.index()]
    }

    /// Whether `g` is dominated by or equal to a stored vector at `node`.
    pub fn covers(&self, node: NodeIndex, g: &[f64]) -> bool {
        self.per_node[node.index()]
            .iter()
            .any(|s| s.as_slice() == g || dominates_unchecked(s, g))
    }

    /// Stores `g` at `node`, evicting the vectors it dominates.
    pub fn insert(&mut self, node: NodeIndex, g: Vec<f64>) {
        let set = &mut self.per_node[node.index()];
        set.retain(|s| !dominates_unchecked(&g, s));
        set.push(g);
    }
}

/// The three pruning rules, checked in order.
pub fn prune(
    estimate: &[f64],
    g_v: &[f64],
    current_best: Option<&[f64]>,
    region_upper: &[f64],
    visited: &VisitedStore,
    node: NodeIndex,
) -> PruneDecision {
    if let Some(best) = current_best {
        if estimate.iter().zip(best).any(|(e, b)| e > b) {
            return PruneDecision::Prune(PruneReason::ExceedsIncumbent);
        }
    }
    if estimate.iter().zip(region_upper).any(|(e, u)| e >= u) {
        return PruneDecision::Prune(PruneReason::TouchesRegionBound);
    }
    if visited.covers(node, g_v) {
        return PruneDecision::Prune(PruneReason::DominatedAtNode);
    }
    PruneDecision::Keep
}

/// Counters for one oracle call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub expanded: u64,
    pub generated: u64,
    pub pruned_incumbent: u64,
    pub pruned_region: u64,
    pub pruned_dominated: u64,
}

impl SearchStats {
    fn count(&mut self, reason: PruneReason) {
        match reason {
            PruneReason::ExceedsIncumbent => self.pruned_incumbent += 1,
            PruneReason::TouchesRegionBound => self.pruned_region += 1,
            PruneReason::DominatedAtNode => self.pruned_dominated += 1,
        }
    }

    pub fn accumulate(&mut self, other: &SearchStats) {
        self.expanded += other.expanded;
        self.generated += other.generated;
        self.pruned_incumbent += other.pruned_incumbent;
        self.pruned_region += other.pruned_region;
        self.pruned_dominated += other.pruned_dominated;
    }
}

/// Polled during long searches; returning `true` aborts with
/// [`OracleError::Interrupted`].
pub type InterruptCheck = Arc<dyn Fn() -> bool + Send + Sync>;

const INTERRUPT_POLL: u64 = 256;

struct Label {
    node: NodeIndex,
    g: Vec<f64>,
    trail: usize,
}

/// Multi-objective depth-first search oracle with dominance pruning and
/// scalarized neighbor ordering.
#[derive(Clone)]
pub struct ModfsOracle {
    graph: Arc<MultiObjectiveGraph>,
    source: NodeIndex,
    target: NodeIndex,
    bounds: LowerBounds,
    mode: GuidanceMode,
    interrupt: Option<InterruptCheck>,
    last: SearchStats,
    total: SearchStats,
}

impl core::fmt::Debug for ModfsOracle {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ModfsOracle")
            .field("source", &self.source)
            .field("target", &self.target)
            .field("mode", &self.mode)
            .field("total", &self.total)
            .finish_non_exhaustive()
    }
}

impl ModfsOracle {
    /// Precomputes the reversed-Dijkstra lower bounds toward `target`.
    pub fn new(
        graph: Arc<MultiObjectiveGraph>,
        source: NodeIndex,
        target: NodeIndex,
        mode: GuidanceMode,
    ) -> Result<Self, OracleError> {
        let bounds = graph.lower_bounds(target)?;
        if source.index() >= graph.node_count() {
            return Err(crate::graph::GraphError::UnknownIndex(source.index()).into());
        }
        Ok(ModfsOracle {
            graph,
            source,
            target,
            bounds,
            mode,
            interrupt: None,
            last: SearchStats::default(),
            total: SearchStats::default(),
        })
    }

    pub fn with_interrupt(mut self, check: InterruptCheck) -> Self {
        self.interrupt = Some(check);
        self
    }

    pub fn set_interrupt(&mut self, check: Option<InterruptCheck>) {
        self.interrupt = check;
    }

    pub fn graph(&self) -> &Arc<MultiObjectiveGraph> {
        &self.graph
    }

    pub fn source(&self) -> NodeIndex {
        self.source
    }

    pub fn target(&self) -> NodeIndex {
        self.target
    }

    pub fn mode(&self) -> GuidanceMode {
        self.mode
    }

    pub fn lower_bounds(&self) -> &LowerBounds {
        &self.bounds
    }

    /// Counters of the most recent [`ModfsOracle::solve_region`] call.
    pub fn last_stats(&self) -> SearchStats {
        self.last
    }

    pub fn total_stats(&self) -> SearchStats {
        self.total
    }

    /// Searches for a Pareto-optimal path strictly below `region.upper()`.
    ///
    /// The first goal hit becomes the incumbent; afterwards only prefixes
    /// that could match or beat it in every objective survive, and a goal
    /// hit replaces it only when it dominates. The final incumbent is
    /// Pareto-optimal among all source-target paths.
    pub fn solve_region(&mut self, region: &Region) -> Result<OracleOutcome<Path>, OracleError> {
        if !self.bounds.reaches_target(self.source) {
            return Err(OracleError::Unreachable);
        }
        let g = &*self.graph;
        let m = g.objective_count();
        let upper = region.upper().as_slice();
        let reference = GuidanceReference::for_region(region);
        let mut stats = SearchStats::default();

        let mut visited = VisitedStore::new(g.node_count());
        // (parent trail index, edge taken)
        let mut trails: Vec<(usize, Option<EdgeIndex>)> = vec![(usize::MAX, None)];
        let mut stack = vec![Label {
            node: self.source,
            g: vec![0.0; m],
            trail: 0,
        }];
        visited.insert(self.source, vec![0.0; m]);
        let mut best: Option<(Vec<f64>, usize)> = None;
        let mut neighbors: Vec<(f64, NodeIndex, usize, Vec<f64>, EdgeIndex)> = Vec::new();

        while let Some(label) = stack.pop() {
            if stats.expanded % INTERRUPT_POLL == 0 {
                if let Some(check) = &self.interrupt {
                    if check() {
                        self.last = stats;
                        self.total.accumulate(&stats);
                        return Err(OracleError::Interrupted);
                    }
                }
            }
            if let Some((b, _)) = &best {
                let h = self.bounds.at(label.node);
                if label.g.iter().zip(h).zip(b).any(|((x, y), bb)| x + y > *bb) {
                    stats.count(PruneReason::ExceedsIncumbent);
                    continue;
                }
            }
            stats.expanded += 1;

            if label.node == self.target {
                let improves = match &best {
                    None => strictly_below_unchecked(&label.g, upper),
                    Some((b, _)) => dominates_unchecked(&label.g, b),
                };
                if improves {
                    best = Some((label.g, label.trail));
                }
                continue;
            }

            neighbors.clear();
            for (position, (ei, e)) in g.outgoing(label.node).enumerate() {
                stats.generated += 1;
                let gv: Vec<f64> = label.g.iter().zip(&e.cost).map(|(a, c)| a + c).collect();
                let estimate: Vec<f64> = gv.iter().zip(self.bounds.at(e.to)).map(|(a, h)| a + h).collect();
                match prune(
                    &estimate,
                    &gv,
                    best.as_ref().map(|(b, _)| b.as_slice()),
                    upper,
                    &visited,
                    e.to,
                ) {
                    PruneDecision::Prune(reason) => stats.count(reason),
                    PruneDecision::Keep => {
                        let d = guidance_distance(&estimate, self.mode, reference)?;
                        visited.insert(e.to, gv.clone());
                        neighbors.push((d, e.to, position, gv, ei));
                    }
                }
            }
            neighbors.sort_by(|a, b| {
                a.0.total_cmp(&b.0)
                    .then_with(|| a.1.cmp(&b.1))
                    .then_with(|| a.2.cmp(&b.2))
            });
            // Reverse push so the closest neighbor is popped first.
            for (_, node, _, gv, ei) in neighbors.drain(..).rev() {
                trails.push((label.trail, Some(ei)));
                stack.push(Label {
                    node,
                    g: gv,
                    trail: trails.len() - 1,
                });
            }
        }

        self.last = stats;
        self.total.accumulate(&stats);
        Ok(match best {
            None => OracleOutcome::Infeasible,
            Some((value, trail)) => {
                let mut edges = Vec::new();
                let mut t = trail;
                while let (parent, Some(e)) = trails[t] {
                    edges.push(e);
                    t = parent;
                }
                edges.reverse();
                let path = g.path_from_edges(edges, self.source)?;
                debug_assert_eq!(path.value.as_slice(), value.as_slice());
                OracleOutcome::Success(Solution {
                    value: path.value.clone(),
                    payload: path,
                })
            }
        })
    }
}

impl ParetoOracle for ModfsOracle {
    type Payload = Path;

    fn objective_count(&self) -> usize {
        self.graph.objective_count()
    }

    fn extreme(&mut self, objective: usize) -> Result<Option<Solution<Path>>, OracleError> {
        Ok(self
            .graph
            .lexicographic_shortest_path(self.source, self.target, objective)?
            .map(|p| Solution {
                value: p.value.clone(),
                payload: p,
            }))
    }

    fn solve(&mut self, region: &Region) -> Result<OracleOutcome<Path>, OracleError> {
        self.solve_region(region)
    }

    fn nadir_bound(&self) -> Option<ObjectiveVector> {
        Some(self.graph.simple_path_cost_bound(self.source, self.target).into())
    }
}

/// Oracle over an explicit list of non-dominated vectors.
///
/// Picks the point strictly below the region's upper corner that minimizes
/// the guidance distance; ties go to the lexicographically smallest vector.
/// The payload is the point's index in the list.
#[derive(Debug, Clone)]
pub struct FrontLookupOracle {
    front: Vec<ObjectiveVector>,
    mode: GuidanceMode,
}

impl FrontLookupOracle {
    /// `front` must be non-empty, uniform in dimension and mutually
    /// non-dominated.
    pub fn new(front: Vec<ObjectiveVector>, mode: GuidanceMode) -> Self {
        assert!(!front.is_empty(), "front lookup needs at least one point");
        FrontLookupOracle { front, mode }
    }

    pub fn front(&self) -> &[ObjectiveVector] {
        &self.front
    }
}

impl ParetoOracle for FrontLookupOracle {
    type Payload = usize;

    fn objective_count(&self) -> usize {
        self.front[0].dim()
    }

    fn extreme(&mut self, objective: usize) -> Result<Option<Solution<usize>>, OracleError> {
        Ok(self
            .front
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a[objective].total_cmp(&b[objective]).then_with(|| a.lex_cmp(b)))
            .map(|(i, v)| Solution {
                value: v.clone(),
                payload: i,
            }))
    }

    fn nadir_bound(&self) -> Option<ObjectiveVector> {
        let m = self.front[0].dim();
        Some(
            (0..m)
                .map(|i| self.front.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max))
                .collect::<Vec<_>>()
                .into(),
        )
    }

    fn solve(&mut self, region: &Region) -> Result<OracleOutcome<usize>, OracleError> {
        let reference = GuidanceReference::for_region(region);
        let mut best: Option<(f64, usize)> = None;
        for (i, v) in self.front.iter().enumerate() {
            if !strictly_below_unchecked(v, region.upper()) {
                continue;
            }
            let d = guidance_distance(v, self.mode, reference)?;
            let better = match best {
                None => true,
                Some((bd, bi)) => match d.total_cmp(&bd) {
                    Ordering::Less => true,
                    Ordering::Equal => lex_cmp(v, &self.front[bi]) == Ordering::Less,
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some((d, i));
            }
        }
        Ok(match best {
            None => OracleOutcome::Infeasible,
            Some((_, i)) => OracleOutcome::Success(Solution {
                value: self.front[i].clone(),
                payload: i,
            }),
        })
    }
}
