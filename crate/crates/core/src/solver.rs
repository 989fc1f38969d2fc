//! Alternating fixed-point solver for the entropic MAP estimate.
//!
//! Each iteration picks `nu` from the schedule, sets `alpha_k ∝ theta_k^(nu/(nu-1))`, then
//! sets `theta_k ∝ a nu alpha_k + counts_k`. Both steps are exact coordinate maximizers of the
//! joint surrogate [`aux_big_l`](crate::objective::aux_big_l), so at fixed `nu` the surrogate
//! never decreases. As `nu` grows the surrogate's stationary point approaches a local maximum
//! of the entropic log-joint.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{aux_big_l_raw, check_nu, check_strength, log_joint_raw};
use crate::simplex::{linf, normalize, CountVector, SimplexVector};

/// Upper bound on the configurable floor.
pub const MAX_FLOOR: f64 = 1e-6;
/// Upper bound on the configurable initialization jitter.
pub const MAX_JITTER: f64 = 1e-3;

/// How `nu` evolves over iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NuSchedule {
    /// The same `nu` every iteration.
    Constant { nu: f64 },
    /// `nu_t = min(initial * growth^(t-1), max)`.
    Geometric { initial: f64, growth: f64, max: f64 },
}

impl Default for NuSchedule {
    fn default() -> Self {
        NuSchedule::Geometric {
            initial: 2.0,
            growth: 1.5,
            max: 1000.0,
        }
    }
}

impl NuSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NuSchedule::Constant { nu } => check_nu(nu),
            NuSchedule::Geometric {
                initial,
                growth,
                max,
            } => {
                check_nu(initial)?;
                check_nu(max)?;
                if max < initial {
                    return Err(Error::InvalidParameter(format!(
                        "nu max ({max}) must be >= nu initial ({initial})"
                    )));
                }
                if !(growth.is_finite() && growth > 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "nu growth must be finite and > 1, got {growth}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn initial(&self) -> f64 {
        match *self {
            NuSchedule::Constant { nu } => nu,
            NuSchedule::Geometric { initial, .. } => initial,
        }
    }

    pub fn max(&self) -> f64 {
        match *self {
            NuSchedule::Constant { nu } => nu,
            NuSchedule::Geometric { max, .. } => max,
        }
    }

    /// The value following `nu`.
    pub fn next(&self, nu: f64) -> f64 {
        match *self {
            NuSchedule::Constant { nu } => nu,
            NuSchedule::Geometric { growth, max, .. } => (nu * growth).min(max),
        }
    }

    /// Infinite sequence of per-iteration values.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::successors(Some(self.initial()), move |&nu| Some(self.next(nu)))
    }
}

/// Starting point for `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// `(counts_k + 1) / (total + K)`; strictly interior.
    SmoothedMl,
    Uniform,
    Explicit(SimplexVector),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Prior strength; larger values favour lower-entropy estimates.
    pub a: f64,
    pub schedule: NuSchedule,
    /// Convergence threshold on the L-infinity change in theta between iterations.
    pub tol: f64,
    pub max_iter: usize,
    /// Lower clamp on theta before exponentiation and logs. Ignored when `a == 0`.
    pub floor: f64,
    pub init: Init,
    /// Relative multiplicative perturbation of the initial theta, in `[0, MAX_JITTER]`.
    pub jitter: f64,
    pub seed: u64,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            a: 0.0,
            schedule: NuSchedule::default(),
            tol: 1e-10,
            max_iter: 100_000,
            floor: 1e-15,
            init: Init::SmoothedMl,
            jitter: 0.0,
            seed: 0,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn with_a(a: f64) -> Self {
        Self {
            a,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_strength(self.a)?;
        self.schedule.validate()?;
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol must be finite and > 0, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        if !(0.0..=MAX_FLOOR).contains(&self.floor) {
            return Err(Error::InvalidParameter(format!(
                "floor must lie in [0, {MAX_FLOOR}], got {}",
                self.floor
            )));
        }
        if !(0.0..=MAX_JITTER).contains(&self.jitter) {
            return Err(Error::InvalidParameter(format!(
                "jitter must lie in [0, {MAX_JITTER}], got {}",
                self.jitter
            )));
        }
        Ok(())
    }
}

/// One iteration of the solver, as recorded when `record_trace` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub nu: f64,
    /// Surrogate at the incoming (theta, alpha), evaluated with this iteration's `nu`.
    /// `None` on the first iteration, which has no incoming alpha.
    #[serde(with = "crate::ext_f64::option")]
    pub big_l_before: Option<f64>,
    /// Surrogate after the alpha update.
    #[serde(with = "crate::ext_f64")]
    pub big_l_after_alpha: f64,
    /// Surrogate after the theta update.
    #[serde(with = "crate::ext_f64")]
    pub big_l: f64,
    /// Entropic log-joint at the updated theta.
    #[serde(with = "crate::ext_f64")]
    pub log_joint: f64,
    pub theta_change: f64,
    /// `|big_l - log_joint|`, the surrogate's approximation gap.
    #[serde(with = "crate::ext_f64")]
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub theta: SimplexVector,
    /// Optimal alpha for the returned theta at `final_nu`.
    pub alpha: SimplexVector,
    pub iterations: usize,
    pub converged: bool,
    pub final_nu: f64,
    /// L-infinity theta change of the last iteration.
    pub final_theta_change: f64,
    #[serde(with = "crate::ext_f64")]
    pub log_joint_value: f64,
    #[serde(with = "crate::ext_f64")]
    pub big_l_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRecord>>,
}

impl FitResult {
    /// `|big_l - log_joint|` at the returned point.
    pub fn approximation_gap(&self) -> f64 {
        (self.big_l_value - self.log_joint_value).abs()
    }
}

/// Optimal alpha for fixed theta: `alpha_k ∝ max(theta_k, floor)^(nu/(nu-1))`.
pub fn update_alpha(theta: &SimplexVector, nu: f64, floor: f64) -> Result<SimplexVector> {
    check_nu(nu)?;
    if !(floor.is_finite() && floor >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "floor must be finite and >= 0, got {floor}"
        )));
    }
    Ok(SimplexVector::from_normalized(update_alpha_raw(
        theta.as_slice(),
        nu,
        floor,
    )))
}

/// Optimal theta for fixed alpha: `theta_k ∝ a nu alpha_k + counts_k`.
pub fn update_theta(
    counts: &CountVector,
    alpha: &SimplexVector,
    a: f64,
    nu: f64,
) -> Result<SimplexVector> {
    check_strength(a)?;
    check_nu(nu)?;
    if counts.len() != alpha.len() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: counts has {} entries, alpha has {}",
            counts.len(),
            alpha.len()
        )));
    }
    update_theta_raw(counts.as_slice(), alpha.as_slice(), a, nu).map(SimplexVector::from_normalized)
}

pub(crate) fn update_alpha_raw(theta: &[f64], nu: f64, floor: f64) -> Vec<f64> {
    let exponent = nu / (nu - 1.0);
    // work in the log domain so that large exponents cannot underflow the whole vector
    let logs: Vec<f64> = theta
        .iter()
        .map(|&t| {
            let t = t.max(floor);
            if t == 0.0 {
                f64::NEG_INFINITY
            } else {
                exponent * t.ln()
            }
        })
        .collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights = logs
        .iter()
        .map(|&l| {
            if l == f64::NEG_INFINITY {
                0.0
            } else {
                (l - peak).exp()
            }
        })
        .collect();
    normalize(weights).expect("a simplex point has a positive entry")
}

pub(crate) fn update_theta_raw(counts: &[f64], alpha: &[f64], a: f64, nu: f64) -> Result<Vec<f64>> {
    let strength = a * nu;
    let weights = counts
        .iter()
        .zip(alpha)
        .map(|(&c, &al)| strength * al + c)
        .collect();
    normalize(weights).ok_or_else(|| {
        Error::DegenerateInput(
            "theta update has an all-zero numerator (a = 0 and no counts)".into(),
        )
    })
}

/// Clamps entries below `floor` and renormalizes. Identity when `floor == 0`.
pub(crate) fn floored(theta: &[f64], floor: f64) -> Vec<f64> {
    if floor == 0.0 || theta.iter().all(|&t| t >= floor) {
        return theta.to_vec();
    }
    normalize(theta.iter().map(|&t| t.max(floor)).collect()).expect("floored entries are positive")
}

fn initial_theta(counts: &CountVector, config: &SolverConfig) -> Result<Vec<f64>> {
    let k = counts.len();
    let mut theta = match &config.init {
        Init::SmoothedMl => normalize(counts.as_slice().iter().map(|c| c + 1.0).collect())
            .expect("smoothed counts are positive"),
        Init::Uniform => vec![1.0 / k as f64; k],
        Init::Explicit(start) => {
            if start.len() != k {
                return Err(Error::InvalidInput(format!(
                    "explicit initial theta has {} entries, counts have {k}",
                    start.len()
                )));
            }
            start.as_slice().to_vec()
        }
    };
    if config.jitter > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for t in &mut theta {
            let u: f64 = rng.gen_range(-1.0..=1.0);
            *t *= 1.0 + u * config.jitter;
        }
        theta = normalize(theta).expect("jitter keeps a positive entry");
    }
    Ok(theta)
}

/// Approximate MAP estimate of multinomial parameters under the entropic prior.
///
/// Fails only on invalid input or configuration. Running out of iterations is reported through
/// `converged = false`. Convergence is only declared once `nu` has reached the schedule's
/// maximum.
pub fn fit_map(counts: &CountVector, config: &SolverConfig) -> Result<FitResult> {
    config.validate()?;
    let a = config.a;
    if a == 0.0 && counts.total() <= 0.0 {
        return Err(Error::DegenerateInput(
            "all-zero counts with a = 0 leave theta undetermined".into(),
        ));
    }
    let floor = if a == 0.0 { 0.0 } else { config.floor };
    let c = counts.as_slice();
    let nu_max = config.schedule.max();

    let mut theta = initial_theta(counts, config)?;
    let mut nu = config.schedule.initial();
    let mut incoming_alpha: Option<Vec<f64>> = None;
    let mut trace = config.record_trace.then(Vec::new);
    let mut iterations = 0;
    let mut converged = false;
    let mut last_change = f64::INFINITY;
    let mut last_nu = nu;

    for iteration in 1..=config.max_iter {
        iterations = iteration;
        last_nu = nu;
        let theta_eval = floored(&theta, floor);
        let big_l_before = match (&trace, &incoming_alpha) {
            (Some(_), Some(alpha)) => Some(aux_big_l_raw(a, nu, &theta_eval, alpha, c)),
            _ => None,
        };

        let alpha = update_alpha_raw(&theta, nu, floor);
        let big_l_after_alpha = trace
            .as_ref()
            .map(|_| aux_big_l_raw(a, nu, &theta_eval, &alpha, c));

        let next = update_theta_raw(c, &alpha, a, nu)?;
        last_change = linf(&next, &theta);
        theta = next;

        if let Some(records) = trace.as_mut() {
            let theta_eval = floored(&theta, floor);
            let big_l = aux_big_l_raw(a, nu, &theta_eval, &alpha, c);
            let log_joint = log_joint_raw(&theta_eval, c, a);
            records.push(TraceRecord {
                iteration,
                nu,
                big_l_before,
                big_l_after_alpha: big_l_after_alpha.unwrap_or(f64::NAN),
                big_l,
                log_joint,
                theta_change: last_change,
                gap: (big_l - log_joint).abs(),
            });
        }
        incoming_alpha = Some(alpha);

        if nu >= nu_max && last_change < config.tol {
            converged = true;
            break;
        }
        nu = config.schedule.next(nu);
    }

    let alpha = update_alpha_raw(&theta, last_nu, floor);
    let theta_eval = floored(&theta, floor);
    let log_joint_value = log_joint_raw(&theta_eval, c, a);
    let big_l_value = aux_big_l_raw(a, last_nu, &theta_eval, &alpha, c);

    Ok(FitResult {
        theta: SimplexVector::from_normalized(theta),
        alpha: SimplexVector::from_normalized(alpha),
        iterations,
        converged,
        final_nu: last_nu,
        final_theta_change: last_change,
        log_joint_value,
        big_l_value,
        trace,
    })
}

/// Runs [`fit_map`] on every column; all columns must share one dimension.
pub fn fit_map_batch(columns: &[CountVector], config: &SolverConfig) -> Result<Vec<FitResult>> {
    if let Some(first) = columns.first() {
        let k = first.len();
        if let Some((i, col)) = columns.iter().enumerate().find(|(_, col)| col.len() != k) {
            return Err(Error::InvalidInput(format!(
                "column {i} has {} categories, column 0 has {k}",
                col.len()
            )));
        }
    }
    columns.iter().map(|col| fit_map(col, config)).collect()
}
