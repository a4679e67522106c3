use thiserror::Error;

/// Errors raised by the series engine, the factorization, and the mechanisms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series is not invertible: leading coefficient is zero")]
    NonInvertibleSeries,

    #[error("normalization error: {0}")]
    Normalization(String),

    #[error("sensitivity diverges for gamma = {gamma} (requires gamma < -1/2)")]
    DivergentSensitivity { gamma: f64 },

    #[error("quadrature missed tolerance {tol:e}: best estimate {estimate} with error {error:e}")]
    Precision { estimate: f64, error: f64, tol: f64 },

    #[error("integrand is singular at omega = {0}")]
    SingularPoint(f64),

    #[error("input x_{t} = {value} is outside [0, 1]")]
    SensitivityViolation { t: u64, value: f64 },

    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
