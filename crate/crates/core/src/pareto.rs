//! Objective-space primitives: dominance, non-dominated filtering and
//! axis-aligned regions.
//!
//! Everything here uses the minimization convention. Comparisons are exact;
//! any tolerance belongs to the caller.

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Deref, Index};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ParetoError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty region: lower must be strictly below upper in every component")]
    EmptyRegion,
}

/// A point in objective space. Lower is better in every component.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    pub fn new(components: Vec<f64>) -> Self {
        ObjectiveVector(components)
    }

    pub fn zeros(m: usize) -> Self {
        ObjectiveVector(alloc::vec![0.0; m])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Componentwise sum.
    pub fn add(&self, other: &[f64]) -> ObjectiveVector {
        debug_assert_eq!(self.dim(), other.len());
        ObjectiveVector(self.0.iter().zip(other).map(|(a, b)| a + b).collect())
    }

    pub fn add_assign(&mut self, other: &[f64]) {
        debug_assert_eq!(self.dim(), other.len());
        for (a, b) in self.0.iter_mut().zip(other) {
            *a += b;
        }
    }

    /// Lexicographic comparison under `f64::total_cmp`.
    pub fn lex_cmp(&self, other: &ObjectiveVector) -> core::cmp::Ordering {
        lex_cmp(&self.0, &other.0)
    }
}

impl Deref for ObjectiveVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for ObjectiveVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for ObjectiveVector {
    fn from(v: Vec<f64>) -> Self {
        ObjectiveVector(v)
    }
}

impl<const N: usize> From<[f64; N]> for ObjectiveVector {
    fn from(v: [f64; N]) -> Self {
        ObjectiveVector(v.to_vec())
    }
}

impl fmt::Debug for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl fmt::Display for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            core::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

fn check_dims(a: &[f64], b: &[f64]) -> Result<(), ParetoError> {
    if a.len() != b.len() {
        return Err(ParetoError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

/// `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn pareto_dominates(a: &[f64], b: &[f64]) -> Result<bool, ParetoError> {
    check_dims(a, b)?;
    Ok(dominates_unchecked(a, b))
}

#[inline]
pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// `a` is strictly better than `b` in every component.
///
/// This is the oracle contract against a region's exclusive upper corner.
pub fn strictly_below(a: &[f64], b: &[f64]) -> Result<bool, ParetoError> {
    check_dims(a, b)?;
    Ok(strictly_below_unchecked(a, b))
}

#[inline]
pub(crate) fn strictly_below_unchecked(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x < y)
}

/// Indices of the non-dominated points, in input order.
///
/// Equal vectors collapse onto the earliest occurrence.
pub fn nondominated_indices<P: AsRef<[f64]>>(points: &[P]) -> Result<Vec<usize>, ParetoError> {
    let Some(first) = points.first() else {
        return Ok(Vec::new());
    };
    let m = first.as_ref().len();
    for p in points {
        if p.as_ref().len() != m {
            return Err(ParetoError::DimensionMismatch {
                expected: m,
                found: p.as_ref().len(),
            });
        }
    }

    // Sorting lexicographically means a point can only be dominated by (or
    // equal to) something earlier in the order.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| lex_cmp(points[i].as_ref(), points[j].as_ref()).then(i.cmp(&j)));

    let mut kept: Vec<usize> = Vec::new();
    for &i in &order {
        let p = points[i].as_ref();
        let covered = kept.iter().any(|&k| {
            let q = points[k].as_ref();
            q == p || dominates_unchecked(q, p)
        });
        if !covered {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    Ok(kept)
}

/// Keeps exactly the points that no other input point dominates.
pub fn filter_nondominated(points: &[ObjectiveVector]) -> Result<Vec<ObjectiveVector>, ParetoError> {
    Ok(nondominated_indices(points)?
        .into_iter()
        .map(|i| points[i].clone())
        .collect())
}

impl AsRef<[f64]> for ObjectiveVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Axis-aligned box `[lower, upper)` in objective space.
///
/// `upper` plays the role of the referent: an oracle answer for this region
/// must be strictly below it in every component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    lower: ObjectiveVector,
    upper: ObjectiveVector,
}

impl Region {
    pub fn new(lower: ObjectiveVector, upper: ObjectiveVector) -> Result<Self, ParetoError> {
        check_dims(&lower, &upper)?;
        if !strictly_below_unchecked(&lower, &upper) {
            return Err(ParetoError::EmptyRegion);
        }
        Ok(Region { lower, upper })
    }

    /// Builds a region, or `None` when it would be empty.
    pub(crate) fn non_empty(lower: ObjectiveVector, upper: ObjectiveVector) -> Option<Self> {
        strictly_below_unchecked(&lower, &upper).then_some(Region { lower, upper })
    }

    pub fn lower(&self) -> &ObjectiveVector {
        &self.lower
    }

    pub fn upper(&self) -> &ObjectiveVector {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    /// L∞ diameter `max_i (upper_i - lower_i)`.
    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(self.upper.iter())
            .map(|(l, u)| u - l)
            .fold(0.0, f64::max)
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(self.upper.iter())
            .map(|(l, u)| u - l)
            .product()
    }

    pub fn contains(&self, p: &[f64], strict_upper: bool) -> Result<bool, ParetoError> {
        check_dims(&self.lower, p)?;
        Ok(self.contains_unchecked(p, strict_upper))
    }

    pub(crate) fn contains_unchecked(&self, p: &[f64], strict_upper: bool) -> bool {
        let above = self.lower.iter().zip(p).all(|(l, x)| l <= x);
        let below = if strict_upper {
            strictly_below_unchecked(p, &self.upper)
        } else {
            p.iter().zip(self.upper.iter()).all(|(x, u)| x <= u)
        };
        above && below
    }
}

/// Free-function form of [`Region::contains`].
pub fn region_contains(r: &Region, p: &[f64], strict_upper: bool) -> Result<bool, ParetoError> {
    r.contains(p, strict_upper)
}
