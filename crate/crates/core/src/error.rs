use thiserror::Error;

/// Errors raised by the estimation, oracle and factorization routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed data: bad lengths, out-of-range indices, negative or non-finite entries.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Bad configuration or parameter value (a < 0, nu <= 1, tol <= 0, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Estimation has nothing to work with, e.g. all-zero counts with no prior mass.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// An interior-only quantity was requested at a boundary point of the simplex.
    #[error("theta[{index}] = 0 lies on the simplex boundary")]
    Boundary { index: usize },

    /// The factorization assigns zero probability to a cell with positive count.
    #[error("model assigns zero probability to cell (feature {feature}, column {column}) with positive count")]
    DegenerateModel { feature: usize, column: usize },

    /// A computation would exceed its resource guard.
    #[error("resource limit: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;
