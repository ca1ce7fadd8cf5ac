//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum QbaError {
    /// A matrix carries NaN or infinite entries.
    #[error("matrix has non-finite entries")]
    InvalidMatrix,

    /// A matrix expected to be positive semidefinite has an eigenvalue below
    /// the admitted window.
    #[error(
        "matrix not positive semidefinite: eigenvalue {min_eigenvalue:e} below -{tolerance:e}"
    )]
    NotPsd { min_eigenvalue: f64, tolerance: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The matrix exponential would overflow; the caller must spectrally
    /// shift first.
    #[error("matrix exponential overflow risk: {0}")]
    OverflowRisk(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A solver iterate lost strict positivity; unreachable from the
    /// maximally mixed start under the exponential update rule.
    #[error("solver iterate lost full support (min eigenvalue {0:e})")]
    RankDeficientIterate(f64),

    /// The capacity estimate decreased in standard mode, where it is
    /// guaranteed non-decreasing; signals an implementation bug.
    #[error("capacity estimate decreased by {0:e} in standard mode")]
    NonMonotone(f64),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    /// An input violated a structural invariant (completeness, stochasticity,
    /// normalization); names the invariant and the offending residual.
    #[error("validation failed: {invariant} (residual {residual:e})")]
    Validation { invariant: String, residual: f64 },
}

pub type Result<T> = std::result::Result<T, QbaError>;
