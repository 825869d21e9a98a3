//! The preference-guided interactive loop.
//!
//! A [`Session`] proposes one Pareto-optimal solution, then alternates
//! between a steering request ("improve objective i") and a pairwise
//! comparison of the new candidate against the most-preferred solution so
//! far. Steering picks an unexplored region whose referent guarantees strict
//! improvement in the chosen objective and asks the oracle for a point in it.

use alloc::boxed::Box;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ipro::{IproError, IproState, OracleError, OracleOutcome, ParetoOracle, RegionId, Solution};
use crate::pareto::{lex_cmp, ObjectiveVector, Region};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("session is closed")]
    SessionClosed,
    #[error("session is exhausted; no further improvement is possible")]
    Exhausted,
    #[error("a comparison is pending")]
    PendingComparison,
    #[error("no candidate is pending comparison")]
    NoPendingCandidate,
    #[error("objective index {index} out of range for {m} objectives")]
    InvalidObjective { index: usize, m: usize },
    #[error("no path between source and target")]
    Unreachable,
    #[error(transparent)]
    Ipro(IproError),
}

impl From<IproError> for SessionError {
    fn from(e: IproError) -> Self {
        match e {
            IproError::Unreachable => SessionError::Unreachable,
            other => SessionError::Ipro(other),
        }
    }
}

impl From<OracleError> for SessionError {
    fn from(e: OracleError) -> Self {
        IproError::from(e).into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    /// Referent closest (L1) to the current solution: small local steps.
    #[serde(rename = "closest")]
    ClosestDistance,
    /// Referent closest (L1) to the midpoint between the current solution
    /// and the relevant extreme: larger, balanced steps.
    #[default]
    #[serde(rename = "middle")]
    MiddleDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Improve,
    Relax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteerRequest {
    pub objective: usize,
    pub direction: Direction,
}

impl SteerRequest {
    pub fn improve(objective: usize) -> Self {
        SteerRequest {
            objective,
            direction: Direction::Improve,
        }
    }
}

/// Which side won a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preference {
    /// The freshly proposed solution.
    Candidate,
    /// The most-preferred solution so far.
    Incumbent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionStatus {
    Active,
    Exhausted,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    InitialProposal,
    Steer,
    Comparison,
    Exhausted,
    Exit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionEvent {
    pub seq: u64,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request: Option<SteerRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposed: Option<ObjectiveVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen: Option<Preference>,
    /// Oracle calls made while handling this event.
    pub oracle_calls: u32,
    pub timestamp_micros: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_micros: Option<u64>,
}

/// Time source for transcript timestamps and oracle timings.
pub trait Clock: Send {
    fn now_micros(&self) -> u64;
}

/// A clock that never advances. Keeps transcripts reproducible.
#[derive(Debug, Clone, Copy, Default)]
pub struct FrozenClock;

impl Clock for FrozenClock {
    fn now_micros(&self) -> u64 {
        0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome<P> {
    /// A new candidate, to be compared with the incumbent.
    Candidate {
        candidate: Solution<P>,
        incumbent: Solution<P>,
    },
    /// Nothing improves in the requested direction; the session is over.
    Exhausted { best: Solution<P> },
}

/// Referents whose image promises the requested change in objective `i`.
///
/// For [`Direction::Improve`] these are the regions with `upper_i <= s_i`:
/// any oracle answer in them is strictly better than `s` in objective `i`.
/// [`Direction::Relax`] keeps the complement.
pub fn improving_referents(referents: &[Region], s: &[f64], i: usize, direction: Direction) -> Vec<Region> {
    let images: Vec<&[f64]> = referents.iter().map(|r| r.upper().as_slice()).collect();
    improving_indices(&images, s, i, direction)
        .into_iter()
        .map(|k| referents[k].clone())
        .collect()
}

fn improving_indices(images: &[&[f64]], s: &[f64], i: usize, direction: Direction) -> Vec<usize> {
    images
        .iter()
        .enumerate()
        .filter(|(_, u)| match direction {
            Direction::Improve => u[i] <= s[i],
            Direction::Relax => u[i] > s[i],
        })
        .map(|(k, _)| k)
        .collect()
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Heuristic focus point: `s` itself, or the midpoint of `s` and `extreme`.
fn focus(s: &[f64], heuristic: Heuristic, extreme: &[f64]) -> Vec<f64> {
    match heuristic {
        Heuristic::ClosestDistance => s.to_vec(),
        Heuristic::MiddleDistance => s.iter().zip(extreme).map(|(a, b)| (a + b) / 2.0).collect(),
    }
}

/// Candidate indices ordered by heuristic preference (L1 distance of the
/// image to the focus point, ties by lexicographic image).
fn rank_by_heuristic(images: &[&[f64]], candidates: &[usize], focus: &[f64]) -> Vec<usize> {
    let mut ranked: Vec<(f64, usize)> = candidates.iter().map(|&k| (l1(images[k], focus), k)).collect();
    ranked.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then_with(|| lex_cmp(images[a.1], images[b.1]))
            .then_with(|| a.1.cmp(&b.1))
    });
    ranked.into_iter().map(|(_, k)| k).collect()
}

/// Picks the next referent among `candidates`; `None` when there are none.
///
/// `extreme` is the found solution optimizing the objective being steered
/// toward; it only matters for [`Heuristic::MiddleDistance`].
pub fn select_referent(candidates: &[Region], s: &[f64], heuristic: Heuristic, extreme: &[f64]) -> Option<Region> {
    let images: Vec<&[f64]> = candidates.iter().map(|r| r.upper().as_slice()).collect();
    let all: Vec<usize> = (0..candidates.len()).collect();
    rank_by_heuristic(&images, &all, &focus(s, heuristic, extreme))
        .first()
        .map(|&k| candidates[k].clone())
}

/// One interactive preference-guided search over a fixed oracle.
pub struct Session<O: ParetoOracle> {
    oracle: O,
    ipro: IproState<O::Payload>,
    current: Solution<O::Payload>,
    best: Solution<O::Payload>,
    pending: bool,
    heuristic: Heuristic,
    status: SessionStatus,
    transcript: Vec<InteractionEvent>,
    clock: Box<dyn Clock>,
    seq: u64,
}

impl<O: ParetoOracle> core::fmt::Debug for Session<O> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Session")
            .field("current", &self.current.value)
            .field("best", &self.best.value)
            .field("pending", &self.pending)
            .field("heuristic", &self.heuristic)
            .field("status", &self.status)
            .field("events", &self.transcript.len())
            .finish_non_exhaustive()
    }
}

impl<O: ParetoOracle> Session<O> {
    pub fn start(oracle: O, heuristic: Heuristic) -> Result<Self, SessionError> {
        Self::start_with_clock(oracle, heuristic, Box::new(FrozenClock))
    }

    /// Initializes the partition and proposes the first solution: the oracle
    /// answer for the nadir-cornered region, or an extreme when that region
    /// is already empty or infeasible.
    pub fn start_with_clock(mut oracle: O, heuristic: Heuristic, clock: Box<dyn Clock>) -> Result<Self, SessionError> {
        let t0 = clock.now_micros();
        let mut ipro = IproState::init(&mut oracle, 0.0)?;
        let mut calls = ipro.ideal().dim() as u32;
        let mut initial = None;
        if let Some(id) = ipro.largest_region() {
            let region = ipro.region(id).expect("id from state").clone();
            let outcome = oracle.solve(&region)?;
            calls += 1;
            if let OracleOutcome::Success(sol) = &outcome {
                initial = Some(sol.clone());
            }
            ipro.update_partition(id, outcome)?;
        }
        let initial = match initial {
            Some(sol) => sol,
            None => {
                let e0 = ipro.extreme(0).clone();
                ipro.found()
                    .iter()
                    .find(|s| s.value == e0)
                    .cloned()
                    .expect("extremes are recorded as found")
            }
        };
        let t1 = clock.now_micros();
        let mut session = Session {
            oracle,
            ipro,
            current: initial.clone(),
            best: initial,
            pending: false,
            heuristic,
            status: SessionStatus::Active,
            transcript: Vec::new(),
            clock,
            seq: 0,
        };
        let proposed = Some(session.current.value.clone());
        session.log(EventKind::InitialProposal, None, proposed, None, calls, Some(t1 - t0));
        Ok(session)
    }

    fn log(
        &mut self,
        kind: EventKind,
        request: Option<SteerRequest>,
        proposed: Option<ObjectiveVector>,
        chosen: Option<Preference>,
        oracle_calls: u32,
        oracle_micros: Option<u64>,
    ) {
        let ts = self.clock.now_micros();
        let ts = self.transcript.last().map_or(ts, |e| ts.max(e.timestamp_micros));
        self.transcript.push(InteractionEvent {
            seq: self.seq,
            kind,
            request,
            proposed,
            chosen,
            oracle_calls,
            timestamp_micros: ts,
            oracle_micros,
        });
        self.seq += 1;
    }

    pub fn current(&self) -> &Solution<O::Payload> {
        &self.current
    }

    pub fn best(&self) -> &Solution<O::Payload> {
        &self.best
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn heuristic(&self) -> Heuristic {
        self.heuristic
    }

    /// Whether a candidate awaits [`Session::record_comparison`].
    pub fn has_pending(&self) -> bool {
        self.pending
    }

    pub fn transcript(&self) -> &[InteractionEvent] {
        &self.transcript
    }

    pub fn ipro(&self) -> &IproState<O::Payload> {
        &self.ipro
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }

    pub fn oracle_mut(&mut self) -> &mut O {
        &mut self.oracle
    }

    pub fn objective_count(&self) -> usize {
        self.ipro.ideal().dim()
    }

    /// The extreme used as the middle-distance anchor for a request.
    fn anchor(&self, req: SteerRequest, s: &[f64]) -> ObjectiveVector {
        match req.direction {
            Direction::Improve => self.ipro.extreme(req.objective).clone(),
            Direction::Relax => {
                // Relaxing objective i protects the objective with the most
                // normalized room left to improve.
                let ideal = self.ipro.ideal();
                let nadir = self.ipro.nadir_raw();
                let mut protect = None;
                let mut widest = f64::NEG_INFINITY;
                for k in (0..s.len()).filter(|&k| k != req.objective) {
                    let span = nadir[k] - ideal[k];
                    let gap = if span > 0.0 { (s[k] - ideal[k]) / span } else { 0.0 };
                    if gap > widest {
                        widest = gap;
                        protect = Some(k);
                    }
                }
                self.ipro.extreme(protect.expect("at least two objectives")).clone()
            }
        }
    }

    /// Asks for a new solution that moves the current one in the requested
    /// direction. Infeasible referents are retired and the next one in
    /// heuristic order is tried; when none are left the session is
    /// exhausted and the best solution is returned.
    pub fn steer(&mut self, req: SteerRequest) -> Result<StepOutcome<O::Payload>, SessionError> {
        match self.status {
            SessionStatus::Closed => return Err(SessionError::SessionClosed),
            SessionStatus::Exhausted => return Err(SessionError::Exhausted),
            SessionStatus::Active => {}
        }
        let m = self.objective_count();
        if req.objective >= m {
            return Err(SessionError::InvalidObjective { index: req.objective, m });
        }
        if self.pending {
            return Err(SessionError::PendingComparison);
        }

        let t0 = self.clock.now_micros();
        let s = self.current.value.clone();
        let ids: Vec<RegionId> = self.ipro.regions().map(|(id, _)| id).collect();
        let images: Vec<ObjectiveVector> = self
            .ipro
            .regions()
            .map(|(_, r)| self.ipro.referent_image(r))
            .collect();
        let image_refs: Vec<&[f64]> = images.iter().map(|v| v.as_slice()).collect();
        let candidates = improving_indices(&image_refs, &s, req.objective, req.direction);
        let anchor = self.anchor(req, &s);
        let order = rank_by_heuristic(&image_refs, &candidates, &focus(&s, self.heuristic, &anchor));

        let mut calls = 0u32;
        for k in order {
            let id = ids[k];
            let region = self.ipro.region(id).expect("candidate ids are live").clone();
            let outcome = match self.oracle.solve(&region) {
                Ok(o) => o,
                Err(e) => {
                    let elapsed = self.clock.now_micros().saturating_sub(t0);
                    self.log(EventKind::Steer, Some(req), None, None, calls + 1, Some(elapsed));
                    return Err(e.into());
                }
            };
            calls += 1;
            match outcome {
                OracleOutcome::Infeasible => {
                    self.ipro.update_partition(id, OracleOutcome::Infeasible)?;
                }
                OracleOutcome::Success(sol) => {
                    self.ipro.update_partition(id, OracleOutcome::Success(sol.clone()))?;
                    let elapsed = self.clock.now_micros().saturating_sub(t0);
                    self.current = sol;
                    self.pending = true;
                    let proposed = Some(self.current.value.clone());
                    self.log(EventKind::Steer, Some(req), proposed, None, calls, Some(elapsed));
                    return Ok(StepOutcome::Candidate {
                        candidate: self.current.clone(),
                        incumbent: self.best.clone(),
                    });
                }
            }
        }

        // No unexplored region can deliver the change, but an already-found
        // solution (typically an extreme from initialization) still might.
        let found: Vec<&Solution<O::Payload>> = self
            .ipro
            .found()
            .iter()
            .filter(|sol| match req.direction {
                Direction::Improve => sol.value[req.objective] < s[req.objective],
                Direction::Relax => sol.value[req.objective] > s[req.objective],
            })
            .collect();
        let found_images: Vec<&[f64]> = found.iter().map(|sol| sol.value.as_slice()).collect();
        let all: Vec<usize> = (0..found.len()).collect();
        if let Some(&k) = rank_by_heuristic(&found_images, &all, &focus(&s, self.heuristic, &anchor)).first() {
            let sol = found[k].clone();
            let elapsed = self.clock.now_micros().saturating_sub(t0);
            self.current = sol;
            self.pending = true;
            let proposed = Some(self.current.value.clone());
            self.log(EventKind::Steer, Some(req), proposed, None, calls, Some(elapsed));
            return Ok(StepOutcome::Candidate {
                candidate: self.current.clone(),
                incumbent: self.best.clone(),
            });
        }

        let elapsed = self.clock.now_micros().saturating_sub(t0);
        self.status = SessionStatus::Exhausted;
        self.log(EventKind::Exhausted, Some(req), None, None, calls, Some(elapsed));
        Ok(StepOutcome::Exhausted { best: self.best.clone() })
    }

    /// Records which of candidate and incumbent the user prefers. The search
    /// continues from the candidate either way.
    pub fn record_comparison(&mut self, preferred: Preference) -> Result<(), SessionError> {
        if self.status == SessionStatus::Closed {
            return Err(SessionError::SessionClosed);
        }
        if !self.pending {
            return Err(SessionError::NoPendingCandidate);
        }
        self.pending = false;
        if preferred == Preference::Candidate {
            self.best = self.current.clone();
        }
        self.log(EventKind::Comparison, None, None, Some(preferred), 0, None);
        Ok(())
    }

    /// Ends the session and returns the most-preferred solution. Idempotent.
    pub fn close(&mut self) -> Solution<O::Payload> {
        if self.status != SessionStatus::Closed {
            self.status = SessionStatus::Closed;
            self.pending = false;
            let best = Some(self.best.value.clone());
            self.log(EventKind::Exit, None, best, None, 0, None);
        }
        self.best.clone()
    }
}

/// Orders referent images by the heuristic for callers outside a session.
pub fn heuristic_order(images: &[ObjectiveVector], s: &[f64], heuristic: Heuristic, extreme: &[f64]) -> Vec<usize> {
    let refs: Vec<&[f64]> = images.iter().map(|v| v.as_slice()).collect();
    let all: Vec<usize> = (0..images.len()).collect();
    rank_by_heuristic(&refs, &all, &focus(s, heuristic, extreme))
}
