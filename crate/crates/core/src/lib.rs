//! Maximum-a-posteriori estimation of multinomial parameters under the sparsity-inducing
//! entropic prior `p(theta) ∝ exp(a Σ_k theta_k log theta_k)`.
//!
//! The prior is not conjugate to the multinomial, so [`solver::fit_map`] maximizes a joint
//! surrogate over `theta` and an auxiliary simplex point `alpha` by alternating two closed-form
//! updates. [`oracle`] holds brute-force references for checking it on small simplices and
//! [`plsi`] embeds the solver as the activation M-step of a small latent-component EM.
//!
//! ```
//! use entropic_map::{fit_map, CountVector, NuSchedule, SolverConfig};
//!
//! let counts = CountVector::new(vec![6.0, 4.0]).unwrap();
//! let config = SolverConfig {
//!     schedule: NuSchedule::Constant { nu: 1000.0 },
//!     ..SolverConfig::with_a(5.0)
//! };
//! let fit = fit_map(&counts, &config).unwrap();
//! assert!(fit.converged);
//! // the prior sharpens the maximum-likelihood estimate [0.6, 0.4]
//! assert!(fit.theta[0] > 0.68);
//! ```

pub mod error;
pub mod ext_f64;
pub mod objective;
pub mod oracle;
pub mod plsi;
pub mod simplex;
pub mod solver;

pub use error::{Error, Result};
pub use objective::{
    aux_big_l, aux_ell, entropy_term, log_joint, log_joint_gradient_interior, log_likelihood,
    EntropicObjectiveParams,
};
pub use oracle::{
    golden_section_map, grid_map_search, linf_up_to_ties, local_optimality_check,
    max_pairwise_gain, GridResult, GridSpec,
};
pub use plsi::{
    data_log_likelihood, e_step, em_fit, em_fit_from, gen_synthetic, gen_synthetic_with_overlap,
    m_step, CountMatrix, EmConfig, EmFit, ExpectedCounts, Factorization, SyntheticData,
};
pub use simplex::{counts_from_observations, ml_estimate, CountVector, SimplexVector};
pub use solver::{
    fit_map, fit_map_batch, update_alpha, update_theta, FitResult, Init, NuSchedule, SolverConfig,
    TraceRecord,
};
