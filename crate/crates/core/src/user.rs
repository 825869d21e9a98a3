//! Simulated decision makers.
//!
//! A user's latent utility is a weighted sum of per-objective components,
//! each the mean of a small stack of decreasing logistic curves over the
//! normalized objective value. Comparisons see Gaussian noise; the
//! "which objective to improve?" answer uses the noiseless utility.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default standard deviation of the additive utility noise.
pub const DEFAULT_NOISE_SIGMA: f64 = 0.01;
/// Probe step, as a fraction of an objective's normalization range.
pub const PROBE_STEP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UserError {
    #[error("a user model needs at least two objectives, got {0}")]
    TooFewObjectives(usize),
    #[error("normalization has {found} bounds, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sigmoid {
    pub center: f64,
    pub steepness: f64,
}

impl Sigmoid {
    /// `logistic(steepness * (center - x))`: decreasing in `x`.
    pub fn eval(&self, x: f64) -> f64 {
        logistic(self.steepness * (self.center - x))
    }
}

pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

/// Which side of a comparison won.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Choice {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserModel {
    pub weights: Vec<f64>,
    pub sigmoids: Vec<Vec<Sigmoid>>,
    pub noise_sigma: f64,
    pub normalization: Vec<Bounds>,
    pub seed: u64,
}

/// A ChaCha stream for one purpose within one trial.
///
/// Stream 0 samples the user; other streams carry per-method noise so
/// methods sharing a trial seed see the same user but independent noise.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl UserModel {
    /// Samples weights from a flat Dirichlet and, per objective, one to three
    /// sigmoids with centers in `[0, 1]` and steepness in `[5, 20]`.
    pub fn sample(m: usize, seed: u64) -> Result<Self, UserError> {
        if m < 2 {
            return Err(UserError::TooFewObjectives(m));
        }
        let mut rng = trial_rng(seed, 0);
        let raw: Vec<f64> = (0..m).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = raw.iter().sum();
        let weights = raw.iter().map(|w| w / total).collect();
        let sigmoids = (0..m)
            .map(|_| {
                let k = rng.random_range(1..=3usize);
                (0..k)
                    .map(|_| Sigmoid {
                        center: rng.random_range(0.0..=1.0),
                        steepness: rng.random_range(5.0..=20.0),
                    })
                    .collect()
            })
            .collect();
        Ok(UserModel {
            weights,
            sigmoids,
            noise_sigma: DEFAULT_NOISE_SIGMA,
            normalization: vec![Bounds { min: 0.0, max: 1.0 }; m],
            seed,
        })
    }

    pub fn objective_count(&self) -> usize {
        self.weights.len()
    }

    /// Normalizes objective `i` over `[ideal_i, nadir_i]`.
    pub fn with_normalization(mut self, ideal: &[f64], nadir: &[f64]) -> Result<Self, UserError> {
        let m = self.objective_count();
        if ideal.len() != m || nadir.len() != m {
            return Err(UserError::DimensionMismatch {
                expected: m,
                found: ideal.len().min(nadir.len()),
            });
        }
        self.normalization = ideal
            .iter()
            .zip(nadir)
            .map(|(&min, &max)| Bounds { min, max })
            .collect();
        Ok(self)
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    fn normalize(&self, i: usize, x: f64) -> f64 {
        let Bounds { min, max } = self.normalization[i];
        let span = max - min;
        if span <= 0.0 {
            return if x <= min { 0.0 } else { 1.0 };
        }
        ((x - min) / span).clamp(0.0, 1.0)
    }

    /// Component utility of objective `i` at normalized value `x`.
    pub fn component(&self, i: usize, x: f64) -> f64 {
        let stack = &self.sigmoids[i];
        stack.iter().map(|s| s.eval(x)).sum::<f64>() / stack.len() as f64
    }

    /// Noiseless utility in `[0, 1]`.
    pub fn utility(&self, v: &[f64]) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * self.component(i, self.normalize(i, v[i])))
            .sum()
    }

    /// Utility plus `N(0, sigma)` noise, clamped to `[0, 1]`.
    pub fn noisy_utility<R: Rng + ?Sized>(&self, v: &[f64], rng: &mut R) -> f64 {
        (self.utility(v) + self.noise(rng)).clamp(0.0, 1.0)
    }

    fn noise<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.noise_sigma > 0.0 {
            Normal::new(0.0, self.noise_sigma).expect("finite sigma").sample(rng)
        } else {
            0.0
        }
    }

    /// Noisy pairwise comparison; exact ties go to `a`.
    pub fn compare<R: Rng + ?Sized>(&self, a: &[f64], b: &[f64], rng: &mut R) -> Choice {
        let ua = self.noisy_utility(a, rng);
        let ub = self.noisy_utility(b, rng);
        if ua >= ub {
            Choice::A
        } else {
            Choice::B
        }
    }

    /// Utility gain from shrinking objective `i` by one probe step, with the
    /// probe clamped to the normalization box.
    pub fn probe_gain(&self, current: &[f64], i: usize) -> f64 {
        let Bounds { min, max } = self.normalization[i];
        let mut probe = current.to_vec();
        probe[i] = (current[i] - PROBE_STEP * (max - min)).clamp(min, max);
        self.utility(&probe) - self.utility(current)
    }

    /// The objective whose probe step gains the most utility; ties go to the
    /// smallest index.
    pub fn choose_objective(&self, current: &[f64]) -> usize {
        let mut best = 0;
        let mut best_gain = f64::NEG_INFINITY;
        for i in 0..self.objective_count() {
            let gain = self.probe_gain(current, i);
            if gain > best_gain {
                best_gain = gain;
                best = i;
            }
        }
        best
    }
}
