//! Points on the probability simplex and per-category count vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance accepted on the sum of a simplex vector without touching it.
pub const SIMPLEX_SUM_TOL: f64 = 1e-12;

/// Sum deviations below this (and above [`SIMPLEX_SUM_TOL`]) are absorbed by renormalizing.
pub const SIMPLEX_RENORM_TOL: f64 = 1e-9;

/// A point on the probability simplex: nonnegative entries summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexVector {
    values: Vec<f64>,
}

impl SimplexVector {
    /// Validates `values` as a simplex point.
    ///
    /// Entries must be finite and nonnegative. A sum within [`SIMPLEX_SUM_TOL`] of one is kept
    /// bit-for-bit; a sum within [`SIMPLEX_RENORM_TOL`] is renormalized; anything further off
    /// is rejected.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_entries(&values, "simplex vector")?;
        let sum: f64 = values.iter().sum();
        let deviation = (sum - 1.0).abs();
        if deviation <= SIMPLEX_SUM_TOL {
            Ok(Self { values })
        } else if deviation < SIMPLEX_RENORM_TOL {
            Ok(Self {
                values: values.into_iter().map(|v| v / sum).collect(),
            })
        } else {
            Err(Error::InvalidInput(format!(
                "simplex vector sums to {sum}, not 1"
            )))
        }
    }

    /// Normalizes nonnegative weights onto the simplex.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        check_entries(&weights, "weight vector")?;
        normalize(weights)
            .map(|values| Self { values })
            .ok_or_else(|| Error::DegenerateInput("weights sum to zero".into()))
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("simplex dimension must be >= 1".into()));
        }
        Ok(Self {
            values: vec![1.0 / k as f64; k],
        })
    }

    pub fn point_mass(k: usize, index: usize) -> Result<Self> {
        if index >= k {
            return Err(Error::InvalidInput(format!(
                "point mass index {index} out of range for K = {k}"
            )));
        }
        let mut values = vec![0.0; k];
        values[index] = 1.0;
        Ok(Self { values })
    }

    /// Wraps values already known to satisfy the simplex invariants.
    pub(crate) fn from_normalized(values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty());
        debug_assert!((values.iter().sum::<f64>() - 1.0).abs() < SIMPLEX_RENORM_TOL);
        Self { values }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.values.iter()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// Largest entry and its index (first index on ties).
    pub fn max_entry(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| {
                if v > best.1 {
                    (i, v)
                } else {
                    best
                }
            })
    }

    /// L-infinity distance. Panics on dimension mismatch.
    pub fn linf_distance(&self, other: &SimplexVector) -> f64 {
        linf(&self.values, &other.values)
    }
}

impl std::ops::Index<usize> for SimplexVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.values[index]
    }
}

impl TryFrom<Vec<f64>> for SimplexVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<SimplexVector> for Vec<f64> {
    fn from(v: SimplexVector) -> Self {
        v.values
    }
}

/// Nonnegative real counts per category: observed tallies or expected counts from an E-step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CountVector {
    counts: Vec<f64>,
    total: f64,
}

impl CountVector {
    pub fn new(counts: Vec<f64>) -> Result<Self> {
        check_entries(&counts, "count vector")?;
        let total = counts.iter().sum();
        Ok(Self { counts, total })
    }

    pub fn zeros(k: usize) -> Result<Self> {
        Self::new(vec![0.0; k])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Counts multiplied by `factor`; `factor` must be finite and nonnegative.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be finite and nonnegative, got {factor}"
            )));
        }
        Self::new(self.counts.iter().map(|c| c * factor).collect())
    }
}

impl std::ops::Index<usize> for CountVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.counts[index]
    }
}

impl TryFrom<Vec<f64>> for CountVector {
    type Error = Error;

    fn try_from(counts: Vec<f64>) -> Result<Self> {
        Self::new(counts)
    }
}

impl From<CountVector> for Vec<f64> {
    fn from(v: CountVector) -> Self {
        v.counts
    }
}

/// Tallies category indices in `0..k`.
pub fn counts_from_observations(observations: &[usize], k: usize) -> Result<CountVector> {
    if k == 0 {
        return Err(Error::InvalidInput(
            "number of categories must be >= 1".into(),
        ));
    }
    let mut counts = vec![0.0; k];
    for (position, &x) in observations.iter().enumerate() {
        if x >= k {
            return Err(Error::InvalidInput(format!(
                "observation at position {position} is {x}, outside 0..{k}"
            )));
        }
        counts[x] += 1.0;
    }
    CountVector::new(counts)
}

/// Maximum-likelihood multinomial estimate: counts divided by their total.
pub fn ml_estimate(counts: &CountVector) -> Result<SimplexVector> {
    if counts.total() <= 0.0 {
        return Err(Error::DegenerateInput(
            "cannot estimate from all-zero counts".into(),
        ));
    }
    normalize(counts.as_slice().to_vec())
        .map(SimplexVector::from_normalized)
        .ok_or_else(|| Error::DegenerateInput("cannot estimate from all-zero counts".into()))
}

/// Divides by the sum. `None` when the sum is not strictly positive and finite.
pub(crate) fn normalize(mut weights: Vec<f64>) -> Option<Vec<f64>> {
    let sum: f64 = weights.iter().sum();
    if !(sum > 0.0 && sum.is_finite()) {
        return None;
    }
    for w in &mut weights {
        *w /= sum;
    }
    Some(weights)
}

pub(crate) fn linf(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn check_entries(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{what} must have at least one entry"
        )));
    }
    if let Some((i, v)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        return Err(Error::InvalidInput(format!(
            "{what} entry {i} is {v}; entries must be finite and nonnegative"
        )));
    }
    Ok(())
}
