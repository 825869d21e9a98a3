//! Simulated-user trials of the steering loop.

use alloc::vec::Vec;

use rand::Rng;

use crate::gppe::QueryRecord;
use crate::ipro::ParetoOracle;
use crate::pareto::ObjectiveVector;
use crate::session::{Preference, Session, SessionError, SteerRequest, StepOutcome};
use crate::user::{Choice, UserModel};

/// Per-trial cache of noisy utilities, so a value shown twice scores the same.
#[derive(Debug, Default)]
struct UtilityCache {
    seen: Vec<(ObjectiveVector, f64)>,
}

impl UtilityCache {
    fn get<R: Rng + ?Sized>(&mut self, user: &UserModel, v: &ObjectiveVector, rng: &mut R) -> f64 {
        if let Some((_, u)) = self.seen.iter().find(|(w, _)| w == v) {
            return *u;
        }
        let u = user.noisy_utility(v, rng);
        self.seen.push((v.clone(), u));
        u
    }
}

/// Result of one steering trial.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringTrial {
    pub records: Vec<QueryRecord>,
    /// Utility of the initial proposal, which seeds the running maximum.
    pub initial_utility: f64,
    /// Whether the session ran out of improving referents before the budget.
    pub exhausted: bool,
}

/// Runs `budget` queries of the steering loop against a simulated user.
///
/// Each query is one objective choice, one steer and one comparison. Once
/// the session is exhausted the remaining queries repeat the best
/// solution's utility.
pub fn run_steering_trial<O: ParetoOracle, R: Rng + ?Sized>(
    session: &mut Session<O>,
    user: &UserModel,
    budget: usize,
    rng: &mut R,
) -> Result<SteeringTrial, SessionError> {
    let mut cache = UtilityCache::default();
    let initial = session.current().value.clone();
    let initial_utility = cache.get(user, &initial, rng);
    let mut running = initial_utility;
    let mut records = Vec::with_capacity(budget);
    let mut exhausted = false;
    for q in 1..=budget {
        if !exhausted {
            let objective = user.choose_objective(&session.current().value);
            match session.steer(SteerRequest::improve(objective))? {
                StepOutcome::Candidate { candidate, incumbent } => {
                    let u = cache.get(user, &candidate.value, rng);
                    let pref = match user.compare(&candidate.value, &incumbent.value, rng) {
                        Choice::A => Preference::Candidate,
                        Choice::B => Preference::Incumbent,
                    };
                    session.record_comparison(pref)?;
                    running = running.max(u);
                    records.push(QueryRecord { query: q, shown: candidate.value, utility: u, max_utility: running });
                    continue;
                }
                StepOutcome::Exhausted { .. } => exhausted = true,
            }
        }
        let best = session.best().value.clone();
        let u = cache.get(user, &best, rng);
        running = running.max(u);
        records.push(QueryRecord { query: q, shown: best, utility: u, max_utility: running });
    }
    Ok(SteeringTrial { records, initial_utility, exhausted })
}
