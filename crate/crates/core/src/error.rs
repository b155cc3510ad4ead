use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("time {t} outside trajectory span [{start}, {end}]")]
    Range { t: f64, start: f64, end: f64 },

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("envelope fit failed: {0}")]
    Fit(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("no resonance: {0}")]
    NoResonance(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
