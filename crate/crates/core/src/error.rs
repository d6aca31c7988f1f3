use thiserror::Error;

/// Errors raised by the Bayes-space, quadrature and inference routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("element is not normalizable: {0}")]
    NotNormalizable(String),

    #[error("non-finite integrand value at node {location:?}")]
    EvaluationFailure { location: Vec<f64> },

    #[error("invalid quadrature configuration: {0}")]
    InvalidQuadrature(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("size cap exceeded: {0}")]
    CapExceeded(String),

    #[error("Gram matrix is singular ({floored} eigenvalues floored)")]
    SingularGram { floored: usize },

    #[error("information matrix is singular (condition number {condition:e})")]
    SingularInformation { condition: f64 },

    #[error("matrix is not positive definite (leading minor {minor} failed)")]
    NotPositiveDefinite { minor: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("estimate cannot serve as a measure: {0}")]
    MeasureInvalid(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
