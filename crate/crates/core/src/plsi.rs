//! Toy probabilistic latent component analysis with a sparse activation M-step.
//!
//! A nonnegative feature × column matrix `X` is modelled as
//! `X[f, t] ≈ mass_t · Σ_z W_z[f] · H_t[z]` where every dictionary column `W_z` and every
//! activation vector `H_t` lies on a simplex. EM alternates the usual responsibility E-step
//! with an M-step that re-estimates `W` by normalization and each `H_t` with the entropic MAP
//! solver, so columns are pushed towards few active components.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{entropy_term, log_joint};
use crate::simplex::{ml_estimate, CountVector, SimplexVector};
use crate::solver::{fit_map, Init, SolverConfig};

/// Minimum solver floor used for activations so no activation becomes exactly zero.
pub const EM_ACTIVATION_FLOOR: f64 = 1e-12;

/// Nonnegative feature × column counts, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountMatrix {
    features: usize,
    columns: usize,
    values: Vec<f64>,
}

impl CountMatrix {
    /// Builds a matrix from feature rows. Every column must have a positive sum.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let features = rows.len();
        if features == 0 {
            return Err(Error::InvalidInput(
                "count matrix needs at least one feature row".into(),
            ));
        }
        let columns = rows[0].len();
        if let Some((f, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != columns) {
            return Err(Error::InvalidInput(format!(
                "row {f} has {} entries, row 0 has {columns}",
                row.len()
            )));
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidInput(format!(
                "entry ({}, {}) is {v}; counts must be finite and nonnegative",
                i / columns.max(1),
                i % columns.max(1)
            )));
        }
        let matrix = Self {
            features,
            columns,
            values,
        };
        if let Some(t) = (0..columns).find(|&t| matrix.column_sum(t) <= 0.0) {
            return Err(Error::InvalidInput(format!(
                "column {t} has zero total count"
            )));
        }
        Ok(matrix)
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn get(&self, f: usize, t: usize) -> f64 {
        self.values[f * self.columns + t]
    }

    pub fn row(&self, f: usize) -> &[f64] {
        &self.values[f * self.columns..(f + 1) * self.columns]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.features).map(move |f| self.row(f))
    }

    pub fn column_sum(&self, t: usize) -> f64 {
        (0..self.features).map(|f| self.get(f, t)).sum()
    }

    pub fn grand_total(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc + v)
    }

    /// Matrix whose row `i` is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.features)?;
        Self::from_rows(perm.iter().map(|&f| self.row(f).to_vec()).collect())
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n
        || perm
            .iter()
            .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
    {
        return Err(Error::InvalidInput(format!("not a permutation of 0..{n}")));
    }
    Ok(())
}

/// Dictionary, per-column activations and per-column masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    /// `Z` distributions over the `F` features.
    pub components: Vec<SimplexVector>,
    /// `T` distributions over the `Z` components.
    pub activations: Vec<SimplexVector>,
    pub column_masses: Vec<f64>,
}

impl Factorization {
    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    /// Model probability of feature `f` in column `t`, `Σ_z W_z[f] H_t[z]`.
    pub fn probability(&self, f: usize, t: usize) -> f64 {
        self.components
            .iter()
            .zip(self.activations[t].iter())
            .map(|(w, &h)| w[f] * h)
            .sum()
    }

    /// Expected count `mass_t · Σ_z W_z[f] H_t[z]`.
    pub fn reconstruct(&self, f: usize, t: usize) -> f64 {
        self.column_masses[t] * self.probability(f, t)
    }

    fn check_against(&self, matrix: &CountMatrix) -> Result<()> {
        let z = self.components.len();
        if z == 0 {
            return Err(Error::InvalidInput(
                "factorization has no components".into(),
            ));
        }
        if let Some((i, w)) = self
            .components
            .iter()
            .enumerate()
            .find(|(_, w)| w.len() != matrix.features())
        {
            return Err(Error::InvalidInput(format!(
                "component {i} has {} features, matrix has {}",
                w.len(),
                matrix.features()
            )));
        }
        if self.activations.len() != matrix.columns()
            || self.column_masses.len() != matrix.columns()
        {
            return Err(Error::InvalidInput(format!(
                "factorization covers {} columns, matrix has {}",
                self.activations.len(),
                matrix.columns()
            )));
        }
        if let Some((t, h)) = self
            .activations
            .iter()
            .enumerate()
            .find(|(_, h)| h.len() != z)
        {
            return Err(Error::InvalidInput(format!(
                "activation {t} has {} entries, expected {z}",
                h.len()
            )));
        }
        Ok(())
    }

    /// Same factorization with component entries reordered to follow `perm` (see
    /// [`CountMatrix::permute_rows`]).
    pub fn permute_features(&self, perm: &[usize]) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|w| {
                check_permutation(perm, w.len())?;
                SimplexVector::new(perm.iter().map(|&f| w[f]).collect())
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            components,
            activations: self.activations.clone(),
            column_masses: self.column_masses.clone(),
        })
    }
}

/// E-step output: expected counts split by latent component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedCounts {
    /// `Z × F`: `Σ_t X[f, t] r[z | f, t]`.
    pub feature_counts: Vec<Vec<f64>>,
    /// `T × Z`: `Σ_f X[f, t] r[z | f, t]`.
    pub component_counts: Vec<Vec<f64>>,
}

#[allow(clippy::needless_range_loop)]
pub fn e_step(matrix: &CountMatrix, fact: &Factorization) -> Result<ExpectedCounts> {
    fact.check_against(matrix)?;
    let z = fact.num_components();
    let mut feature_counts = vec![vec![0.0; matrix.features()]; z];
    let mut component_counts = vec![vec![0.0; z]; matrix.columns()];
    let mut joint = vec![0.0; z];
    for t in 0..matrix.columns() {
        let h = &fact.activations[t];
        for f in 0..matrix.features() {
            let x = matrix.get(f, t);
            if x == 0.0 {
                continue;
            }
            for (zi, slot) in joint.iter_mut().enumerate() {
                *slot = fact.components[zi][f] * h[zi];
            }
            let p: f64 = joint.iter().sum();
            if p <= 0.0 {
                return Err(Error::DegenerateModel {
                    feature: f,
                    column: t,
                });
            }
            for (zi, &j) in joint.iter().enumerate() {
                let share = x * j / p;
                feature_counts[zi][f] += share;
                component_counts[t][zi] += share;
            }
        }
    }
    Ok(ExpectedCounts {
        feature_counts,
        component_counts,
    })
}

/// Per-column record of an activation update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationUpdate {
    /// Column log-joint (at this M-step's expected counts) of the incoming activation.
    #[serde(with = "crate::ext_f64")]
    pub before: f64,
    /// Same objective at the updated activation.
    #[serde(with = "crate::ext_f64")]
    pub after: f64,
    /// Solver's surrogate gap for this column.
    #[serde(with = "crate::ext_f64")]
    pub gap: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MStep {
    pub factorization: Factorization,
    /// Components that received no expected mass and were reset to uniform.
    pub reset_components: Vec<usize>,
    pub column_fits: Vec<crate::solver::FitResult>,
}

/// Re-estimates the factorization from expected counts.
///
/// Dictionary columns get the plain ML update; each activation gets the entropic MAP fit with
/// strength `a` (floor raised to at least [`EM_ACTIVATION_FLOOR`]). With `warm_start`, column
/// `t`'s fit starts from `warm_start[t]` instead of `solver.init`.
pub fn m_step(
    expected: &ExpectedCounts,
    a: f64,
    solver: &SolverConfig,
    warm_start: Option<&[SimplexVector]>,
) -> Result<MStep> {
    let z = expected.feature_counts.len();
    if z == 0 {
        return Err(Error::InvalidInput(
            "expected counts have no components".into(),
        ));
    }
    let features = expected.feature_counts[0].len();
    let mut reset_components = Vec::new();
    let mut components = Vec::with_capacity(z);
    for (zi, counts) in expected.feature_counts.iter().enumerate() {
        let counts = CountVector::new(counts.clone())?;
        if counts.len() != features {
            return Err(Error::InvalidInput(format!(
                "feature counts of component {zi} have {} entries, expected {features}",
                counts.len()
            )));
        }
        if counts.total() > 0.0 {
            components.push(ml_estimate(&counts)?);
        } else {
            reset_components.push(zi);
            components.push(SimplexVector::uniform(features)?);
        }
    }

    if let Some(warm) = warm_start {
        if warm.len() != expected.component_counts.len() {
            return Err(Error::InvalidInput(format!(
                "warm start has {} activations, expected {}",
                warm.len(),
                expected.component_counts.len()
            )));
        }
    }
    let mut activations = Vec::with_capacity(expected.component_counts.len());
    let mut column_masses = Vec::with_capacity(expected.component_counts.len());
    let mut column_fits = Vec::with_capacity(expected.component_counts.len());
    for (t, counts) in expected.component_counts.iter().enumerate() {
        let counts = CountVector::new(counts.clone())?;
        let mut config = SolverConfig {
            a,
            floor: solver.floor.max(EM_ACTIVATION_FLOOR),
            ..solver.clone()
        };
        if let Some(warm) = warm_start {
            config.init = Init::Explicit(warm[t].clone());
        }
        let fit = fit_map(&counts, &config)?;
        column_masses.push(counts.total());
        activations.push(fit.theta.clone());
        column_fits.push(fit);
    }
    Ok(MStep {
        factorization: Factorization {
            components,
            activations,
            column_masses,
        },
        reset_components,
        column_fits,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    pub components: usize,
    /// Entropic strength on activations only.
    pub a: f64,
    pub solver: SolverConfig,
    pub em_iters: usize,
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            components: 2,
            a: 0.0,
            solver: SolverConfig {
                floor: EM_ACTIVATION_FLOOR,
                ..SolverConfig::default()
            },
            em_iters: 50,
            seed: 0,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.components == 0 {
            return Err(Error::InvalidParameter(
                "number of components must be >= 1".into(),
            ));
        }
        if self.em_iters == 0 {
            return Err(Error::InvalidParameter("em_iters must be >= 1".into()));
        }
        SolverConfig {
            a: self.a,
            ..self.solver.clone()
        }
        .validate()
    }
}

/// Diagnostics for one EM iteration, measured after its M-step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmIteration {
    pub iteration: usize,
    #[serde(with = "crate::ext_f64")]
    pub log_likelihood: f64,
    /// Mean Shannon entropy (nats) of the activations.
    pub mean_activation_entropy: f64,
    pub reset_components: Vec<usize>,
    pub activation_updates: Vec<ActivationUpdate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmFit {
    pub factorization: Factorization,
    #[serde(with = "crate::ext_f64")]
    pub initial_log_likelihood: f64,
    pub iterations: Vec<EmIteration>,
}

/// `Σ_{f,t} X[f, t] log Σ_z W_z[f] H_t[z]`; `-inf` if a positive cell has zero probability.
pub fn data_log_likelihood(matrix: &CountMatrix, fact: &Factorization) -> Result<f64> {
    fact.check_against(matrix)?;
    let mut total = 0.0;
    for f in 0..matrix.features() {
        for t in 0..matrix.columns() {
            let x = matrix.get(f, t);
            if x > 0.0 {
                total += x * fact.probability(f, t).ln();
            }
        }
    }
    Ok(total)
}

/// Mean over columns of the activation entropy; zero when there are no columns.
pub fn mean_activation_entropy(fact: &Factorization) -> f64 {
    if fact.activations.is_empty() {
        return 0.0;
    }
    let sum: f64 = fact.activations.iter().map(|h| -entropy_term(h)).sum();
    sum / fact.activations.len() as f64
}

/// Seeded starting point: dictionary entries drawn uniformly then normalized, uniform
/// activations, masses equal to column sums.
pub fn initial_factorization(
    matrix: &CountMatrix,
    components: usize,
    seed: u64,
) -> Result<Factorization> {
    if components == 0 {
        return Err(Error::InvalidParameter(
            "number of components must be >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dictionary = (0..components)
        .map(|_| {
            // (0, 1]: keeps every entry strictly positive
            let w = (0..matrix.features())
                .map(|_| 1.0 - rng.gen::<f64>())
                .collect();
            SimplexVector::from_weights(w)
        })
        .collect::<Result<_>>()?;
    Ok(Factorization {
        components: dictionary,
        activations: vec![SimplexVector::uniform(components)?; matrix.columns()],
        column_masses: (0..matrix.columns())
            .map(|t| matrix.column_sum(t))
            .collect(),
    })
}

/// EM from the seeded [`initial_factorization`].
pub fn em_fit(matrix: &CountMatrix, config: &EmConfig) -> Result<EmFit> {
    config.validate()?;
    let init = initial_factorization(matrix, config.components, config.seed)?;
    em_fit_from(matrix, init, config)
}

/// Runs `config.em_iters` E/M alternations starting from `init`. Activation fits are warm
/// started from the previous iteration's activations.
pub fn em_fit_from(matrix: &CountMatrix, init: Factorization, config: &EmConfig) -> Result<EmFit> {
    config.validate()?;
    init.check_against(matrix)?;
    if init.num_components() != config.components {
        return Err(Error::InvalidInput(format!(
            "initial factorization has {} components, config asks for {}",
            init.num_components(),
            config.components
        )));
    }
    let initial_log_likelihood = data_log_likelihood(matrix, &init)?;
    let mut fact = init;
    let mut iterations = Vec::with_capacity(config.em_iters);
    for iteration in 1..=config.em_iters {
        let expected = e_step(matrix, &fact)?;
        let step = m_step(&expected, config.a, &config.solver, Some(&fact.activations))?;
        let activation_updates = fact
            .activations
            .iter()
            .zip(&step.factorization.activations)
            .zip(&expected.component_counts)
            .zip(&step.column_fits)
            .map(|(((old, new), counts), fit)| {
                let counts = CountVector::new(counts.clone())?;
                Ok(ActivationUpdate {
                    before: log_joint(old, &counts, config.a)?,
                    after: log_joint(new, &counts, config.a)?,
                    gap: fit.approximation_gap(),
                    converged: fit.converged,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        fact = step.factorization;
        iterations.push(EmIteration {
            iteration,
            log_likelihood: data_log_likelihood(matrix, &fact)?,
            mean_activation_entropy: mean_activation_entropy(&fact),
            reset_components: step.reset_components,
            activation_updates,
        });
    }
    Ok(EmFit {
        factorization: fact,
        initial_log_likelihood,
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticData {
    pub matrix: CountMatrix,
    pub truth: Factorization,
}

/// Relative weight of off-block features in [`gen_synthetic`] dictionaries.
pub const DEFAULT_OVERLAP: f64 = 0.05;

/// Draws a synthetic count matrix with sparse ground-truth activations.
///
/// Equivalent to [`gen_synthetic_with_overlap`] with [`DEFAULT_OVERLAP`].
pub fn gen_synthetic(
    features: usize,
    columns: usize,
    components: usize,
    sparsity: usize,
    seed: u64,
) -> Result<SyntheticData> {
    gen_synthetic_with_overlap(
        features,
        columns,
        components,
        sparsity,
        DEFAULT_OVERLAP,
        seed,
    )
}

/// Draws a synthetic count matrix with sparse ground-truth activations.
///
/// Component `z` concentrates on its own contiguous block of features (so
/// `features >= components` is required) with weights uniform in `[0.5, 1.5]`; every other
/// feature gets such a weight times `overlap`, so `overlap = 0` gives disjoint supports.
/// Each column activates `sparsity` distinct components with weights uniform in `[0.5, 1.5]`,
/// draws a mass uniformly from `50..=150` and samples that many categorical feature draws.
pub fn gen_synthetic_with_overlap(
    features: usize,
    columns: usize,
    components: usize,
    sparsity: usize,
    overlap: f64,
    seed: u64,
) -> Result<SyntheticData> {
    if !(0.0..=1.0).contains(&overlap) {
        return Err(Error::InvalidParameter(format!(
            "overlap must lie in [0, 1], got {overlap}"
        )));
    }
    if features == 0 || components == 0 {
        return Err(Error::InvalidParameter(
            "features and components must be >= 1".into(),
        ));
    }
    if components > features {
        return Err(Error::InvalidParameter(format!(
            "{components} components need at least as many features, got {features}"
        )));
    }
    if !(1..=components).contains(&sparsity) {
        return Err(Error::InvalidParameter(format!(
            "sparsity must lie in 1..={components}, got {sparsity}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dictionary: Vec<SimplexVector> = (0..components)
        .map(|z| {
            let lo = z * features / components;
            let hi = (z + 1) * features / components;
            let w = (0..features)
                .map(|f| {
                    let w: f64 = rng.gen_range(0.5..=1.5);
                    if (lo..hi).contains(&f) {
                        w
                    } else {
                        w * overlap
                    }
                })
                .collect();
            SimplexVector::from_weights(w)
        })
        .collect::<Result<_>>()?;

    let mut rows = vec![Vec::with_capacity(columns); features];
    let mut activations = Vec::with_capacity(columns);
    let mut column_masses = Vec::with_capacity(columns);
    for _ in 0..columns {
        let mut h = vec![0.0; components];
        for zi in rand::seq::index::sample(&mut rng, components, sparsity) {
            h[zi] = rng.gen_range(0.5..=1.5);
        }
        let h = SimplexVector::from_weights(h)?;
        let probs: Vec<f64> = (0..features)
            .map(|f| {
                dictionary
                    .iter()
                    .zip(h.iter())
                    .map(|(w, &hz)| w[f] * hz)
                    .sum()
            })
            .collect();
        let mass: u32 = rng.gen_range(50..=150);
        let sampler = WeightedIndex::new(&probs)
            .map_err(|e| Error::InvalidInput(format!("bad feature distribution: {e}")))?;
        let mut counts = vec![0.0; features];
        for _ in 0..mass {
            counts[sampler.sample(&mut rng)] += 1.0;
        }
        for (row, c) in rows.iter_mut().zip(counts) {
            row.push(c);
        }
        activations.push(h);
        column_masses.push(f64::from(mass));
    }
    Ok(SyntheticData {
        matrix: CountMatrix::from_rows(rows)?,
        truth: Factorization {
            components: dictionary,
            activations,
            column_masses,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::NuSchedule;
    use approx::assert_abs_diff_eq;

    fn sv(v: &[f64]) -> SimplexVector {
        SimplexVector::new(v.to_vec()).unwrap()
    }

    fn matrix(rows: &[&[f64]]) -> CountMatrix {
        CountMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn totals(e: &ExpectedCounts) -> (f64, f64) {
        (
            e.feature_counts.iter().flatten().sum(),
            e.component_counts.iter().flatten().sum(),
        )
    }

    #[test]
    fn matrix_validation() {
        assert!(CountMatrix::from_rows(vec![]).is_err());
        assert!(CountMatrix::from_rows(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(CountMatrix::from_rows(vec![vec![1.0, -2.0]]).is_err());
        assert!(CountMatrix::from_rows(vec![vec![1.0, 0.0], vec![2.0, 0.0]]).is_err());
        let empty = CountMatrix::from_rows(vec![vec![], vec![]]).unwrap();
        assert_eq!((empty.features(), empty.columns()), (2, 0));
    }

    #[test]
    fn single_component_e_step() {
        let x = matrix(&[&[1.0, 2.0], &[3.0, 0.0], &[0.5, 4.0]]);
        let fact = Factorization {
            components: vec![sv(&[0.2, 0.3, 0.5])],
            activations: vec![sv(&[1.0]); 2],
            column_masses: vec![4.5, 6.0],
        };
        let e = e_step(&x, &fact).unwrap();
        assert_eq!(e.feature_counts, vec![vec![3.0, 3.0, 4.5]]);
        assert_eq!(e.component_counts, vec![vec![4.5], vec![6.0]]);
    }

    #[test]
    fn separable_e_step() {
        let x = matrix(&[&[2.0], &[3.0], &[0.0], &[0.0]]);
        let fact = Factorization {
            components: vec![sv(&[0.5, 0.5, 0.0, 0.0]), sv(&[0.0, 0.0, 0.5, 0.5])],
            activations: vec![sv(&[0.3, 0.7])],
            column_masses: vec![5.0],
        };
        let e = e_step(&x, &fact).unwrap();
        assert_eq!(e.component_counts, vec![vec![5.0, 0.0]]);
        assert_eq!(e.feature_counts[1], vec![0.0; 4]);
    }

    #[test]
    fn symmetric_e_step_splits_evenly() {
        let x = matrix(&[&[2.0, 1.0], &[4.0, 3.0]]);
        let fact = Factorization {
            components: vec![sv(&[0.5, 0.5]); 2],
            activations: vec![sv(&[0.5, 0.5]); 2],
            column_masses: vec![6.0, 4.0],
        };
        let e = e_step(&x, &fact).unwrap();
        assert_eq!(e.feature_counts, vec![vec![1.5, 3.5]; 2]);
        assert_eq!(e.component_counts, vec![vec![3.0, 3.0], vec![2.0, 2.0]]);
        let (a, b) = totals(&e);
        assert_eq!(a, x.grand_total());
        assert_eq!(b, x.grand_total());
    }

    #[test]
    fn e_step_degenerate_model() {
        let x = matrix(&[&[1.0], &[1.0]]);
        let fact = Factorization {
            components: vec![sv(&[1.0, 0.0])],
            activations: vec![sv(&[1.0])],
            column_masses: vec![2.0],
        };
        assert_eq!(
            e_step(&x, &fact).unwrap_err(),
            Error::DegenerateModel {
                feature: 1,
                column: 0
            }
        );
    }

    #[test]
    fn e_step_dimension_checks() {
        let x = matrix(&[&[1.0], &[1.0]]);
        let fact = Factorization {
            components: vec![sv(&[0.2, 0.3, 0.5])],
            activations: vec![sv(&[1.0])],
            column_masses: vec![2.0],
        };
        assert!(matches!(e_step(&x, &fact), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn m_step_without_prior_normalizes() {
        let expected = ExpectedCounts {
            feature_counts: vec![vec![1.0, 3.0], vec![2.0, 2.0]],
            component_counts: vec![vec![3.0, 1.0], vec![1.0, 2.0]],
        };
        let m = m_step(&expected, 0.0, &SolverConfig::default(), None).unwrap();
        let f = &m.factorization;
        assert_eq!(f.components[0].as_slice(), &[0.25, 0.75]);
        assert_eq!(f.components[1].as_slice(), &[0.5, 0.5]);
        assert_eq!(f.activations[0].as_slice(), &[0.75, 0.25]);
        assert_eq!(f.activations[1].as_slice(), &[1.0 / 3.0, 2.0 / 3.0]);
        assert_eq!(f.column_masses, vec![4.0, 3.0]);
        assert!(m.reset_components.is_empty());
    }

    #[test]
    fn m_step_symmetric_column() {
        let expected = ExpectedCounts {
            feature_counts: vec![vec![1.0], vec![1.0]],
            component_counts: vec![vec![5.0, 5.0]],
        };
        let solver = SolverConfig {
            init: Init::Uniform,
            ..SolverConfig::default()
        };
        let m = m_step(&expected, 2.0, &solver, None).unwrap();
        assert_eq!(m.factorization.activations[0].as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn m_step_resets_empty_components() {
        let expected = ExpectedCounts {
            feature_counts: vec![vec![1.0, 3.0, 0.0], vec![0.0; 3]],
            component_counts: vec![vec![4.0, 0.0]],
        };
        let m = m_step(&expected, 0.0, &SolverConfig::default(), None).unwrap();
        assert_eq!(m.reset_components, vec![1]);
        assert_eq!(m.factorization.components[1].as_slice(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn single_component_em() {
        let x = matrix(&[&[1.0, 2.0, 0.0], &[3.0, 0.0, 1.0], &[0.5, 4.0, 2.0]]);
        let mut config = EmConfig {
            components: 1,
            em_iters: 5,
            ..EmConfig::default()
        };
        let base = em_fit(&x, &config).unwrap();
        let row_totals: Vec<f64> = x.rows().map(|r| r.iter().sum::<f64>()).collect();
        let marginal = SimplexVector::from_weights(row_totals).unwrap();
        assert!(base.factorization.components[0].linf_distance(&marginal) < 1e-15);
        assert!(base
            .factorization
            .activations
            .iter()
            .all(|h| h.as_slice() == [1.0]));

        config.a = 5.0;
        let prior = em_fit(&x, &config).unwrap();
        assert_abs_diff_eq!(
            prior.iterations.last().unwrap().log_likelihood,
            base.iterations.last().unwrap().log_likelihood,
            epsilon = 1e-12
        );
    }

    #[test]
    fn unidentifiable_activations_stay_put() {
        let x = matrix(&[&[3.0], &[1.0], &[2.0]]);
        let w = sv(&[0.2, 0.5, 0.3]);
        let init = Factorization {
            components: vec![w.clone(), w],
            activations: vec![sv(&[0.3, 0.7])],
            column_masses: vec![6.0],
        };
        let config = EmConfig {
            components: 2,
            em_iters: 10,
            ..EmConfig::default()
        };
        let fit = em_fit_from(&x, init, &config).unwrap();
        let h = &fit.factorization.activations[0];
        assert_abs_diff_eq!(h[0], 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(h[1], 0.7, epsilon = 1e-12);
    }

    #[test]
    fn em_config_validation() {
        let x = matrix(&[&[1.0]]);
        for config in [
            EmConfig {
                components: 0,
                ..EmConfig::default()
            },
            EmConfig {
                em_iters: 0,
                ..EmConfig::default()
            },
            EmConfig {
                a: -1.0,
                ..EmConfig::default()
            },
        ] {
            assert!(matches!(
                em_fit(&x, &config),
                Err(Error::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn synthetic_point_masses() {
        let data = gen_synthetic_with_overlap(8, 20, 2, 1, 0.0, 3).unwrap();
        for h in &data.truth.activations {
            assert_eq!(h.max_entry().1, 1.0);
        }
        // disjoint blocks
        let w = &data.truth.components;
        assert!(w[0].iter().zip(w[1].iter()).all(|(a, b)| a * b == 0.0));
        for t in 0..20 {
            assert_eq!(data.matrix.column_sum(t), data.truth.column_masses[t]);
        }
    }

    #[test]
    fn synthetic_is_seeded() {
        assert_eq!(
            gen_synthetic(6, 10, 3, 2, 9).unwrap(),
            gen_synthetic(6, 10, 3, 2, 9).unwrap()
        );
        assert_ne!(
            gen_synthetic(6, 10, 3, 2, 9).unwrap(),
            gen_synthetic(6, 10, 3, 2, 10).unwrap()
        );
    }

    #[test]
    fn synthetic_empty_and_invalid() {
        let data = gen_synthetic(4, 0, 2, 1, 1).unwrap();
        assert_eq!(data.matrix.columns(), 0);
        assert!(data.truth.activations.is_empty());
        assert_eq!(data.truth.components.len(), 2);
        assert!(matches!(
            gen_synthetic(4, 5, 2, 3, 1),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            gen_synthetic(4, 5, 2, 0, 1),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            gen_synthetic(1, 5, 2, 1, 1),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            gen_synthetic_with_overlap(4, 5, 2, 1, 1.5, 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn synthetic_overlap_is_light() {
        let data = gen_synthetic(8, 5, 2, 1, 3).unwrap();
        let w = &data.truth.components[0];
        let off_block: f64 = w.as_slice()[4..].iter().sum();
        assert!(off_block > 0.0 && off_block < 0.1, "{off_block}");
    }

    #[test]
    fn activation_floor_is_enforced() {
        let expected = ExpectedCounts {
            feature_counts: vec![vec![1.0], vec![1.0]],
            component_counts: vec![vec![4.0, 0.0]],
        };
        let solver = SolverConfig {
            floor: 0.0,
            schedule: NuSchedule::Constant { nu: 100.0 },
            ..SolverConfig::default()
        };
        let m = m_step(&expected, 3.0, &solver, None).unwrap();
        assert!(m.factorization.activations[0][1] > 0.0);
    }
}
