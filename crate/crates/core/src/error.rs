use thiserror::Error;

/// Errors raised by the spectral laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("field has the wrong shape or side: {0}")]
    Shape(String),

    #[error("non-finite value at mode {mode} (xi = {xi})")]
    Range { mode: usize, xi: f64 },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// An exponent bundle violates the hypotheses of the inequality it was
    /// submitted for. Carries every violated constraint.
    #[error("hypothesis violated: {}", .0.join("; "))]
    Hypothesis(Vec<String>),

    #[error("quadrature did not reach tolerance: estimate {estimate:e} > {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
