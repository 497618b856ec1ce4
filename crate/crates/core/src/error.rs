use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid framework: {0}")]
    InvalidFramework(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("LICQ fails: smallest constraint singular value {margin:e} (largest {largest:e})")]
    LicqFailure { margin: f64, largest: f64 },
    #[error(
        "Newton projection did not converge after {iterations} iterations (residual {residual:e})"
    )]
    ProjectionFailed { iterations: usize, residual: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
