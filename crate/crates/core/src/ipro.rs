//! Divide-and-conquer Pareto front approximation over objective-space boxes.
//!
//! [`IproState`] keeps the bounding box between the ideal point and an
//! (inflated) nadir estimate, partitioned into unexplored regions, a
//! dominated volume and an infeasible volume. Every oracle answer either
//! carves a region around a new Pareto-optimal point or retires the region
//! as infeasible. In two dimensions the partition is exact and disjoint.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pareto::{dominates_unchecked, strictly_below_unchecked, ObjectiveVector, Region};

/// Relative nadir inflation applied per component.
pub const NADIR_RELATIVE_INFLATION: f64 = 0.01;
/// Absolute nadir inflation applied per component.
pub const NADIR_ABSOLUTE_INFLATION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("target is unreachable from source")]
    Unreachable,
    #[error("oracle search interrupted")]
    Interrupted,
    #[error("degenerate normalization axis {0}")]
    DegenerateAxis(usize),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IproError {
    #[error("no solution exists")]
    Unreachable,
    #[error("unknown region {0:?}")]
    UnknownRegion(RegionId),
    #[error("oracle returned an invalid result: {0}")]
    InvalidOracleResult(&'static str),
    #[error(transparent)]
    Oracle(OracleError),
}

impl From<OracleError> for IproError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Unreachable => IproError::Unreachable,
            other => IproError::Oracle(other),
        }
    }
}

/// A Pareto-optimal value vector plus whatever the oracle attached to it
/// (a graph path, a front index, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution<P> {
    pub value: ObjectiveVector,
    pub payload: P,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome<P> {
    Success(Solution<P>),
    Infeasible,
}

/// Anything that can answer "give me a Pareto-optimal point strictly below
/// this region's upper corner".
pub trait ParetoOracle {
    type Payload: Clone;

    fn objective_count(&self) -> usize;

    /// A Pareto-optimal solution minimizing `objective`, or `None` when
    /// there are no solutions at all.
    fn extreme(&mut self, objective: usize) -> Result<Option<Solution<Self::Payload>>, OracleError>;

    /// A Pareto-optimal solution strictly below `region.upper()`, or
    /// [`OracleOutcome::Infeasible`].
    fn solve(&mut self, region: &Region) -> Result<OracleOutcome<Self::Payload>, OracleError>;

    /// A componentwise upper bound on every Pareto-optimal value, when one
    /// is cheaply available. With three or more objectives the extremes
    /// alone can underestimate the nadir; this bound widens the box.
    fn nadir_bound(&self) -> Option<ObjectiveVector> {
        None
    }
}

impl<O: ParetoOracle + ?Sized> ParetoOracle for &mut O {
    type Payload = O::Payload;

    fn objective_count(&self) -> usize {
        (**self).objective_count()
    }

    fn extreme(&mut self, objective: usize) -> Result<Option<Solution<Self::Payload>>, OracleError> {
        (**self).extreme(objective)
    }

    fn solve(&mut self, region: &Region) -> Result<OracleOutcome<Self::Payload>, OracleError> {
        (**self).solve(region)
    }

    fn nadir_bound(&self) -> Option<ObjectiveVector> {
        (**self).nadir_bound()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RegionId(pub u64);

#[derive(Debug, Clone)]
pub struct IproState<P> {
    ideal: ObjectiveVector,
    nadir_raw: ObjectiveVector,
    nadir: ObjectiveVector,
    found: Vec<Solution<P>>,
    extremes: Vec<ObjectiveVector>,
    regions: Vec<(RegionId, Region)>,
    dominated: Vec<Region>,
    infeasible: Vec<Region>,
    next_id: u64,
    tau: f64,
}

impl<P: Clone> IproState<P> {
    /// Computes the per-objective extremes, the ideal point and the nadir
    /// estimate, then carves the bounding box around the extremes.
    pub fn init<O: ParetoOracle<Payload = P>>(oracle: &mut O, tau: f64) -> Result<Self, IproError> {
        let m = oracle.objective_count();
        let mut extremes = Vec::with_capacity(m);
        for i in 0..m {
            let sol = oracle.extreme(i)?.ok_or(IproError::Unreachable)?;
            if sol.value.dim() != m || !sol.value.is_finite() {
                return Err(IproError::InvalidOracleResult("extreme has wrong dimension or is not finite"));
            }
            extremes.push(sol);
        }
        let ideal: ObjectiveVector = (0..m).map(|i| extremes[i].value[i]).collect::<Vec<_>>().into();
        let bound = if m > 2 { oracle.nadir_bound() } else { None };
        let nadir_raw: ObjectiveVector = (0..m)
            .map(|i| {
                let worst = extremes.iter().map(|e| e.value[i]).fold(f64::NEG_INFINITY, f64::max);
                bound.as_ref().map_or(worst, |b| worst.max(b[i]))
            })
            .collect::<Vec<_>>()
            .into();
        let nadir: ObjectiveVector = nadir_raw
            .iter()
            .map(|x| x + NADIR_RELATIVE_INFLATION * x.abs() + NADIR_ABSOLUTE_INFLATION)
            .collect::<Vec<_>>()
            .into();

        let root = Region::non_empty(ideal.clone(), nadir.clone()).expect("inflated nadir exceeds ideal");
        let mut state = IproState {
            ideal,
            nadir_raw,
            nadir,
            found: Vec::new(),
            extremes: extremes.iter().map(|e| e.value.clone()).collect(),
            regions: alloc::vec![(RegionId(0), root)],
            dominated: Vec::new(),
            infeasible: Vec::new(),
            next_id: 1,
            tau,
        };
        for sol in extremes {
            state.insert_found(sol)?;
        }
        Ok(state)
    }

    pub fn ideal(&self) -> &ObjectiveVector {
        &self.ideal
    }

    /// Componentwise max over the extremes, before inflation.
    pub fn nadir_raw(&self) -> &ObjectiveVector {
        &self.nadir_raw
    }

    /// The inflated nadir estimate bounding every region.
    pub fn nadir(&self) -> &ObjectiveVector {
        &self.nadir
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn found(&self) -> &[Solution<P>] {
        &self.found
    }

    /// The value vector that minimized objective `i` during initialization.
    pub fn extreme(&self, i: usize) -> &ObjectiveVector {
        &self.extremes[i]
    }

    pub fn regions(&self) -> impl ExactSizeIterator<Item = (RegionId, &Region)> + '_ {
        self.regions.iter().map(|(id, r)| (*id, r))
    }

    pub fn region(&self, id: RegionId) -> Option<&Region> {
        self.regions.iter().find(|(rid, _)| *rid == id).map(|(_, r)| r)
    }

    pub fn dominated_volume(&self) -> &[Region] {
        &self.dominated
    }

    pub fn infeasible_volume(&self) -> &[Region] {
        &self.infeasible
    }

    /// The initial bounding box `[ideal, nadir]`.
    pub fn bounding_box(&self) -> (&ObjectiveVector, &ObjectiveVector) {
        (&self.ideal, &self.nadir)
    }

    /// Maps an inflated nadir coordinate back to the raw extreme value;
    /// other coordinates pass through unchanged.
    pub fn deflate(&self, i: usize, x: f64) -> f64 {
        if x == self.nadir[i] {
            self.nadir_raw[i]
        } else {
            x
        }
    }

    /// A region's upper corner with nadir coordinates deflated.
    pub fn referent_image(&self, region: &Region) -> ObjectiveVector {
        region
            .upper()
            .iter()
            .enumerate()
            .map(|(i, &x)| self.deflate(i, x))
            .collect::<Vec<_>>()
            .into()
    }

    /// Largest L∞ diameter over the unexplored regions; `0` when none are left.
    ///
    /// Once this is at most `tau`, every Pareto-optimal vector in the
    /// bounding box lies within L∞ distance `tau` of a found vector.
    pub fn error_estimate(&self) -> f64 {
        self.regions.iter().map(|(_, r)| r.diameter()).fold(0.0, f64::max)
    }

    pub fn is_resolved(&self) -> bool {
        self.regions.is_empty() || self.error_estimate() <= self.tau
    }

    /// The region with the largest diameter; ties go to the lexicographically
    /// smallest lower corner.
    pub fn widest_region(&self) -> Option<RegionId> {
        self.regions
            .iter()
            .max_by(|(ia, a), (ib, b)| {
                a.diameter()
                    .total_cmp(&b.diameter())
                    .then_with(|| b.lower().lex_cmp(a.lower()))
                    .then_with(|| ib.cmp(ia))
            })
            .map(|(id, _)| *id)
    }

    /// The region with the largest volume, i.e. the one cornered at the nadir
    /// right after initialization.
    pub fn largest_region(&self) -> Option<RegionId> {
        self.regions
            .iter()
            .max_by(|(ia, a), (ib, b)| a.volume().total_cmp(&b.volume()).then_with(|| ib.cmp(ia)))
            .map(|(id, _)| *id)
    }

    /// Applies an oracle answer for `id` to the partition.
    pub fn update_partition(&mut self, id: RegionId, outcome: OracleOutcome<P>) -> Result<(), IproError> {
        let pos = self
            .regions
            .iter()
            .position(|(rid, _)| *rid == id)
            .ok_or(IproError::UnknownRegion(id))?;
        match outcome {
            OracleOutcome::Infeasible => {
                let (_, region) = self.regions.remove(pos);
                self.infeasible.push(region);
                Ok(())
            }
            OracleOutcome::Success(sol) => {
                let region = &self.regions[pos].1;
                if sol.value.dim() != region.dim() || !sol.value.is_finite() {
                    return Err(IproError::InvalidOracleResult("solution has wrong dimension or is not finite"));
                }
                if !strictly_below_unchecked(&sol.value, region.upper()) {
                    return Err(IproError::InvalidOracleResult("solution is not strictly below the region bound"));
                }
                if self.found.iter().any(|f| dominates_unchecked(&f.value, &sol.value)) {
                    return Err(IproError::InvalidOracleResult("solution is dominated by a found solution"));
                }
                // The queried region is carved even if the point sits below its
                // lower corner; the clamp keeps the pieces inside the region.
                let (_, region) = self.regions.remove(pos);
                let clamped: ObjectiveVector = sol
                    .value
                    .iter()
                    .zip(region.lower().iter())
                    .map(|(v, l)| v.max(*l))
                    .collect::<Vec<_>>()
                    .into();
                self.split(region, &clamped);
                self.insert_found(sol)
            }
        }
    }

    /// Records a Pareto-optimal solution and carves every region that still
    /// contains it.
    fn insert_found(&mut self, sol: Solution<P>) -> Result<(), IproError> {
        let hit: Vec<usize> = self
            .regions
            .iter()
            .enumerate()
            .filter(|(_, (_, r))| r.contains_unchecked(&sol.value, true))
            .map(|(i, _)| i)
            .collect();
        for &i in hit.iter().rev() {
            let (_, region) = self.regions.remove(i);
            self.split(region, &sol.value);
        }
        if self.found.iter().any(|f| f.value == sol.value) {
            return Ok(());
        }
        self.found.retain(|f| !dominates_unchecked(&sol.value, &f.value));
        self.found.push(sol);
        Ok(())
    }

    fn split(&mut self, region: Region, v: &ObjectiveVector) {
        let m = region.dim();
        if let Some(d) = Region::non_empty(v.clone(), region.upper().clone()) {
            self.dominated.push(d);
        }
        if let Some(i) = Region::non_empty(region.lower().clone(), v.clone()) {
            self.infeasible.push(i);
        }
        for j in 0..m {
            let mut upper = region.upper().clone().into_inner();
            upper[j] = v[j];
            let mut lower = region.lower().clone().into_inner();
            // In two dimensions anything left of v in one objective must be
            // above v in the other, so the lower corner can be raised.
            if m == 2 {
                let k = 1 - j;
                lower[k] = lower[k].max(v[k]);
            }
            if let Some(r) = Region::non_empty(lower.into(), upper.into()) {
                let id = RegionId(self.next_id);
                self.next_id += 1;
                self.regions.push((id, r));
            }
        }
    }

    /// One full-front iteration: query the widest region and apply the answer.
    /// Returns `false` when nothing is left to resolve.
    pub fn step<O: ParetoOracle<Payload = P>>(&mut self, oracle: &mut O) -> Result<bool, IproError> {
        if self.is_resolved() {
            return Ok(false);
        }
        let id = self.widest_region().expect("unresolved state has regions");
        let region = self.region(id).expect("id from this state").clone();
        let outcome = oracle.solve(&region)?;
        self.update_partition(id, outcome)?;
        Ok(true)
    }

    /// Found solutions sorted lexicographically by value.
    pub fn sorted_front(&self) -> Vec<Solution<P>> {
        let mut out = self.found.clone();
        out.sort_by(|a, b| a.value.lex_cmp(&b.value));
        out
    }
}

/// Runs the divide-and-conquer loop until the error estimate drops to `tau`.
/// With `tau = 0` on a finite instance this is the exact Pareto front, one
/// solution per distinct value vector.
pub fn enumerate_front<O: ParetoOracle>(oracle: &mut O, tau: f64) -> Result<Vec<Solution<O::Payload>>, IproError> {
    let mut state = IproState::init(oracle, tau)?;
    while state.step(oracle)? {}
    Ok(state.sorted_front())
}
