//! Gaussian-process preference elicitation over a precomputed front.
//!
//! Latent utility gets an RBF-kernel GP prior; each comparison contributes a
//! probit likelihood `Phi((f_w - f_l) / (sqrt(2) * noise))`. The posterior
//! is Laplace-approximated with Newton iterations in the `f = K a`
//! parametrization, so `K` itself is never inverted.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pareto::{lex_cmp, ObjectiveVector};
use crate::user::{Choice, UserModel};

const JITTER: f64 = 1e-8;
const MAX_NEWTON: usize = 100;
const GRAD_TOL: f64 = 1e-6;
const SQRT_2: f64 = core::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GppeError {
    #[error("no comparisons to fit")]
    NoComparisons,
    #[error("comparison references point {0}, which does not exist")]
    BadIndex(usize),
    #[error("kernel system is singular")]
    SingularKernel,
    #[error("front is empty")]
    EmptyFront,
    #[error("budget must be at least one query")]
    ZeroBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpHyper {
    pub lengthscale: f64,
    pub variance: f64,
    pub noise: f64,
}

impl Default for GpHyper {
    fn default() -> Self {
        GpHyper { lengthscale: 0.3, variance: 1.0, noise: 0.1 }
    }
}

impl GpHyper {
    pub fn kernel(&self, a: &[f64], b: &[f64]) -> f64 {
        let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        self.variance * libm::exp(-0.5 * d2 / (self.lengthscale * self.lengthscale))
    }

    fn gram(&self, points: &[Vec<f64>]) -> DMatrix<f64> {
        let n = points.len();
        DMatrix::from_fn(n, n, |i, j| {
            self.kernel(&points[i], &points[j]) + if i == j { JITTER } else { 0.0 }
        })
    }
}

/// Comparison outcomes over a fixed set of normalized points.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PreferenceDataset {
    pub points: Vec<Vec<f64>>,
    /// `(winner, loser)` index pairs.
    pub comparisons: Vec<(usize, usize)>,
}

impl PreferenceDataset {
    pub fn new(points: Vec<Vec<f64>>) -> Self {
        PreferenceDataset { points, comparisons: Vec::new() }
    }

    /// Normalizes `values` to `[0, 1]^m` over their own ideal and nadir.
    pub fn from_front(values: &[ObjectiveVector]) -> Self {
        let m = values.first().map_or(0, |v| v.dim());
        let mut lo = vec![f64::INFINITY; m];
        let mut hi = vec![f64::NEG_INFINITY; m];
        for v in values {
            for i in 0..m {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        let points = values
            .iter()
            .map(|v| {
                (0..m)
                    .map(|i| {
                        let span = hi[i] - lo[i];
                        if span > 0.0 { (v[i] - lo[i]) / span } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        Self::new(points)
    }

    pub fn push(&mut self, winner: usize, loser: usize) {
        self.comparisons.push((winner, loser));
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpPosterior {
    pub hyper: GpHyper,
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub iterations: usize,
}

impl GpPosterior {
    /// The prior, used before any comparison has been made.
    pub fn prior(data: &PreferenceDataset, hyper: GpHyper) -> Self {
        GpPosterior {
            hyper,
            mean: DVector::zeros(data.len()),
            covariance: hyper.gram(&data.points),
            iterations: 0,
        }
    }

    pub fn std_dev(&self, i: usize) -> f64 {
        libm::sqrt(self.covariance[(i, i)].max(0.0))
    }
}

pub fn normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * libm::exp(-0.5 * z * z)
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// `phi(z) / Phi(z)`, stable far into the left tail.
fn inverse_mills(z: f64) -> f64 {
    if z < -30.0 {
        let z2 = z * z;
        -z / (1.0 - 1.0 / z2 + 3.0 / (z2 * z2))
    } else {
        normal_pdf(z) / normal_cdf(z)
    }
}

fn log_cdf(z: f64) -> f64 {
    if z < -30.0 {
        -0.5 * z * z + libm::log(INV_SQRT_2PI) - libm::log(inverse_mills(z))
    } else {
        libm::log(normal_cdf(z))
    }
}

struct Likelihood {
    log: f64,
    grad: DVector<f64>,
    /// Negative Hessian; positive semidefinite.
    w: DMatrix<f64>,
}

fn likelihood(f: &DVector<f64>, data: &PreferenceDataset, noise: f64) -> Likelihood {
    let n = f.len();
    let scale = SQRT_2 * noise;
    let mut log = 0.0;
    let mut grad = DVector::zeros(n);
    let mut w = DMatrix::zeros(n, n);
    for &(a, b) in &data.comparisons {
        let z = (f[a] - f[b]) / scale;
        let lam = inverse_mills(z);
        log += log_cdf(z);
        grad[a] += lam / scale;
        grad[b] -= lam / scale;
        let h = (lam * lam + z * lam) / (scale * scale);
        w[(a, a)] += h;
        w[(b, b)] += h;
        w[(a, b)] -= h;
        w[(b, a)] -= h;
    }
    Likelihood { log, grad, w }
}

/// Laplace approximation of the latent-utility posterior.
pub fn fit_posterior(data: &PreferenceDataset, hyper: GpHyper) -> Result<GpPosterior, GppeError> {
    if data.comparisons.is_empty() {
        return Err(GppeError::NoComparisons);
    }
    let n = data.len();
    if let Some(&(a, b)) = data.comparisons.iter().find(|&&(a, b)| a >= n || b >= n) {
        return Err(GppeError::BadIndex(a.max(b)));
    }
    let k = hyper.gram(&data.points);
    let eye = DMatrix::<f64>::identity(n, n);
    let objective = |a: &DVector<f64>| {
        let f = &k * a;
        likelihood(&f, data, hyper.noise).log - 0.5 * a.dot(&f)
    };

    let mut a = DVector::zeros(n);
    let mut f = DVector::zeros(n);
    let mut lik = likelihood(&f, data, hyper.noise);
    let mut psi = lik.log;
    let mut iterations = 0;
    while iterations < MAX_NEWTON {
        if (&lik.grad - &a).norm() < GRAD_TOL {
            break;
        }
        iterations += 1;
        // a_new = (I + W K)^-1 (W f + grad)
        let system = &eye + &lik.w * &k;
        let rhs = &lik.w * &f + &lik.grad;
        let a_new = system.lu().solve(&rhs).ok_or(GppeError::SingularKernel)?;
        let step = a_new - &a;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial = &a + &step * t;
            let value = objective(&trial);
            if value >= psi {
                accepted = Some((trial, value));
                break;
            }
            t *= 0.5;
        }
        let Some((next, value)) = accepted else { break };
        a = next;
        psi = value;
        f = &k * &a;
        lik = likelihood(&f, data, hyper.noise);
    }

    // (K^-1 + W)^-1 = K (I + W K)^-1
    let system = &eye + &lik.w * &k;
    let inv = system.try_inverse().ok_or(GppeError::SingularKernel)?;
    let cov = &k * inv;
    let covariance = (&cov + cov.transpose()) * 0.5;
    if !f.iter().all(|x| x.is_finite()) {
        return Err(GppeError::SingularKernel);
    }
    Ok(GpPosterior { hyper, mean: f, covariance, iterations })
}

/// Expected improvement of point `i` over the value `best`.
pub fn expected_improvement(post: &GpPosterior, i: usize, best: f64) -> f64 {
    let mu = post.mean[i];
    let sd = post.std_dev(i);
    let gap = mu - best;
    if sd <= 0.0 {
        return gap.max(0.0);
    }
    let z = gap / sd;
    (gap * normal_cdf(z) + sd * normal_pdf(z)).max(0.0)
}

/// The not-yet-shown point with the largest expected improvement over the
/// incumbent's posterior mean, or the incumbent when every point was shown.
pub fn acquire_next(post: &GpPosterior, shown: &[bool], incumbent: usize) -> usize {
    let best = post.mean[incumbent];
    let mut pick = incumbent;
    let mut top = f64::NEG_INFINITY;
    for (i, &seen) in shown.iter().enumerate() {
        if seen {
            continue;
        }
        let ei = expected_improvement(post, i, best);
        if ei > top {
            top = ei;
            pick = i;
        }
    }
    pick
}

/// One row of an elicitation or steering trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub query: usize,
    pub shown: ObjectiveVector,
    pub utility: f64,
    pub max_utility: f64,
}

fn extreme_index(values: &[ObjectiveVector], i: usize) -> usize {
    let mut best = 0;
    for (k, v) in values.iter().enumerate().skip(1) {
        let b = &values[best];
        let better = v[i] < b[i] || (v[i] == b[i] && lex_cmp(v, b).is_lt());
        if better {
            best = k;
        }
    }
    best
}

/// Runs `budget` pairwise queries against a simulated user.
///
/// Query one compares the extremes of objectives 0 and 1; every later query
/// pits the acquisition pick against the current favourite. The utility
/// recorded for a query is the (cached, noisy) utility of the newly shown
/// point, and the running maximum includes both points of the first query.
pub fn run_elicitation<R: Rng + ?Sized>(
    front: &[ObjectiveVector],
    user: &UserModel,
    budget: usize,
    hyper: GpHyper,
    rng: &mut R,
) -> Result<Vec<QueryRecord>, GppeError> {
    run_elicitation_timed(front, user, budget, hyper, rng, &mut |_| {})
}

/// As [`run_elicitation`], reporting each posterior refit and acquisition
/// through `on_proposal` (called with the query index before the work and
/// after it, so callers can time it).
pub fn run_elicitation_timed<R: Rng + ?Sized>(
    front: &[ObjectiveVector],
    user: &UserModel,
    budget: usize,
    hyper: GpHyper,
    rng: &mut R,
    on_proposal: &mut dyn FnMut(ProposalMark),
) -> Result<Vec<QueryRecord>, GppeError> {
    if front.is_empty() {
        return Err(GppeError::EmptyFront);
    }
    if budget == 0 {
        return Err(GppeError::ZeroBudget);
    }
    let n = front.len();
    let mut data = PreferenceDataset::from_front(front);
    let mut cache: Vec<Option<f64>> = vec![None; n];
    let mut shown = vec![false; n];
    let mut utility_of = |i: usize, rng: &mut R| -> f64 {
        *cache[i].get_or_insert_with(|| user.noisy_utility(&front[i], rng))
    };

    let mut records = Vec::with_capacity(budget);
    let e0 = extreme_index(front, 0);
    let e1 = if front[0].dim() > 1 { extreme_index(front, 1) } else { e0 };
    shown[e0] = true;
    shown[e1] = true;
    let u0 = utility_of(e0, rng);
    let u1 = utility_of(e1, rng);
    let mut incumbent = e0;
    if e1 != e0 {
        match user.compare(&front[e0], &front[e1], rng) {
            Choice::A => data.push(e0, e1),
            Choice::B => {
                data.push(e1, e0);
                incumbent = e1;
            }
        }
    }
    let mut running = u0.max(u1);
    records.push(QueryRecord { query: 1, shown: front[e1].clone(), utility: u1, max_utility: running });

    for q in 2..=budget {
        on_proposal(ProposalMark::Start(q));
        let post = if data.comparisons.is_empty() {
            GpPosterior::prior(&data, hyper)
        } else {
            fit_posterior(&data, hyper)?
        };
        let pick = acquire_next(&post, &shown, incumbent);
        on_proposal(ProposalMark::End(q));
        shown[pick] = true;
        let u = utility_of(pick, rng);
        if pick != incumbent {
            match user.compare(&front[pick], &front[incumbent], rng) {
                Choice::A => {
                    data.push(pick, incumbent);
                    incumbent = pick;
                }
                Choice::B => data.push(incumbent, pick),
            }
        }
        running = running.max(u);
        records.push(QueryRecord { query: q, shown: front[pick].clone(), utility: u, max_utility: running });
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProposalMark {
    Start(usize),
    End(usize),
}
