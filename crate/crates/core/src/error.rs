use thiserror::Error;

/// Errors raised by the spectral analysis routines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// An augmented object broke its conjugate-pair or symmetry structure.
    #[error("structure error: {0}")]
    Structure(String),
    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:.3e}, tolerance {tolerance:.3e})")]
    NotPsd { min_eigenvalue: f64, tolerance: f64 },
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("insufficient data: {frames} frame(s), at least {required} required")]
    InsufficientData { frames: usize, required: usize },
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
