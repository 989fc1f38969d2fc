//! Objective evaluation: likelihood, entropic log-joint, the auxiliary bound and its joint
//! surrogate.
//!
//! All values omit the prior's normalizing constant, so they are comparable only at fixed
//! `a` and `K`. Terms of the form `x log x` use `0 log 0 = 0`. A positive count (or positive
//! `alpha_k`) paired with `theta_k = 0` yields `f64::NEG_INFINITY` rather than an error so that
//! boundary candidates can still be ranked.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{CountVector, SimplexVector};

/// Prior strength `a` and auxiliary tightness `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropicObjectiveParams {
    a: f64,
    nu: f64,
}

impl EntropicObjectiveParams {
    pub fn new(a: f64, nu: f64) -> Result<Self> {
        check_strength(a)?;
        check_nu(nu)?;
        Ok(Self { a, nu })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

pub(crate) fn check_strength(a: f64) -> Result<()> {
    if a.is_finite() && a >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "prior strength a must be finite and >= 0, got {a}"
        )))
    }
}

pub(crate) fn check_nu(nu: f64) -> Result<()> {
    if nu.is_finite() && nu > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "nu must be finite and > 1, got {nu}"
        )))
    }
}

fn check_dims(expected: usize, got: usize, what: &str) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "dimension mismatch: theta has {expected} entries, {what} has {got}"
        )))
    }
}

#[inline]
pub(crate) fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `sum_k theta_k log theta_k`, the negative Shannon entropy (in nats).
pub fn entropy_term(theta: &SimplexVector) -> f64 {
    theta.iter().copied().map(xlogx).sum()
}

/// Multinomial data log-likelihood `sum_k counts_k log theta_k` (multinomial coefficient omitted).
pub fn log_likelihood(theta: &SimplexVector, counts: &CountVector) -> Result<f64> {
    check_dims(theta.len(), counts.len(), "counts")?;
    Ok(log_likelihood_raw(theta.as_slice(), counts.as_slice()))
}

pub(crate) fn log_likelihood_raw(theta: &[f64], counts: &[f64]) -> f64 {
    theta
        .iter()
        .zip(counts)
        .map(|(&t, &c)| {
            if c == 0.0 {
                0.0
            } else if t == 0.0 {
                f64::NEG_INFINITY
            } else {
                c * t.ln()
            }
        })
        .sum()
}

/// Unnormalized log posterior: `a sum_k theta_k log theta_k + sum_k counts_k log theta_k`.
pub fn log_joint(theta: &SimplexVector, counts: &CountVector, a: f64) -> Result<f64> {
    check_dims(theta.len(), counts.len(), "counts")?;
    check_strength(a)?;
    Ok(log_joint_raw(theta.as_slice(), counts.as_slice(), a))
}

/// Same as [`log_joint`] on raw slices; `theta` need not be normalized.
pub(crate) fn log_joint_raw(theta: &[f64], counts: &[f64], a: f64) -> f64 {
    let prior: f64 = theta.iter().copied().map(xlogx).sum();
    a * prior + log_likelihood_raw(theta, counts)
}

/// Unconstrained partial derivatives of [`log_joint`]: `a (1 + log theta_k) + counts_k / theta_k`.
///
/// Only defined strictly inside the simplex.
pub fn log_joint_gradient_interior(
    theta: &SimplexVector,
    counts: &CountVector,
    a: f64,
) -> Result<Vec<f64>> {
    check_dims(theta.len(), counts.len(), "counts")?;
    check_strength(a)?;
    if let Some(index) = theta.iter().position(|&t| t == 0.0) {
        return Err(Error::Boundary { index });
    }
    Ok(theta
        .iter()
        .zip(counts.as_slice())
        .map(|(&t, &c)| a * (1.0 + t.ln()) + c / t)
        .collect())
}

/// Auxiliary bound on the entropic term: `a sum_k alpha_k (nu log theta_k - (nu - 1) log alpha_k)`.
pub fn aux_ell(
    params: &EntropicObjectiveParams,
    theta: &SimplexVector,
    alpha: &SimplexVector,
) -> Result<f64> {
    check_dims(theta.len(), alpha.len(), "alpha")?;
    Ok(aux_ell_raw(
        params.a,
        params.nu,
        theta.as_slice(),
        alpha.as_slice(),
    ))
}

pub(crate) fn aux_ell_raw(a: f64, nu: f64, theta: &[f64], alpha: &[f64]) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    // alpha (nu log theta - (nu-1) log alpha) = alpha log alpha + nu alpha log(theta / alpha),
    // which is exact at alpha = theta and keeps the nu-scaled terms from cancelling.
    let sum: f64 = theta
        .iter()
        .zip(alpha)
        .map(|(&t, &al)| {
            if al == 0.0 {
                0.0
            } else if t == 0.0 {
                f64::NEG_INFINITY
            } else {
                al * al.ln() + nu * al * (t.ln() - al.ln())
            }
        })
        .sum();
    a * sum
}

/// Joint surrogate objective: [`aux_ell`] plus the data log-likelihood.
pub fn aux_big_l(
    params: &EntropicObjectiveParams,
    theta: &SimplexVector,
    alpha: &SimplexVector,
    counts: &CountVector,
) -> Result<f64> {
    check_dims(theta.len(), alpha.len(), "alpha")?;
    check_dims(theta.len(), counts.len(), "counts")?;
    Ok(aux_big_l_raw(
        params.a,
        params.nu,
        theta.as_slice(),
        alpha.as_slice(),
        counts.as_slice(),
    ))
}

pub(crate) fn aux_big_l_raw(a: f64, nu: f64, theta: &[f64], alpha: &[f64], counts: &[f64]) -> f64 {
    aux_ell_raw(a, nu, theta, alpha) + log_likelihood_raw(theta, counts)
}
