use thiserror::Error;

/// Errors shared by all layers of the library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix log requires a strictly positive spectrum (smallest eigenvalue {min_eigenvalue:.3e})")]
    NonPositiveSpectrum { min_eigenvalue: f64 },

    #[error("{context}: operator must be positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite {
        context: &'static str,
        min_eigenvalue: f64,
    },

    #[error("invalid protocol step: {0}")]
    InvalidStep(&'static str),

    #[error("state must be full rank for this operation (smallest eigenvalue {min_eigenvalue:.3e})")]
    RankDeficientState { min_eigenvalue: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
