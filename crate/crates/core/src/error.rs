use thiserror::Error;

/// Errors raised by the certification and tracking routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An interval operation left its domain, e.g. division by an interval
    /// whose rectangle contains the origin.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs violate a documented precondition (dimension mismatch,
    /// time outside [0, 1], malformed thresholds, ...).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("numerically singular Jacobian")]
    SingularJacobian,

    #[error("refinement did not certify after {iterations} iterations")]
    RefinementDiverged { iterations: usize },

    #[error("stepsize underflow at t = {t} (dt = {dt:e})")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("path exceeded {steps} steps")]
    StepLimit { steps: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
