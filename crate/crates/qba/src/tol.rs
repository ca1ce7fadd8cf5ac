//! Numerical tolerance windows used across the library.
//!
//! All windows are absolute on unit-scale quantities (states carry unit
//! trace, channels preserve it), stated in `f64` and converted to the working
//! scalar type at the call site.

/// Validation window for construction-time invariants: Hermiticity residuals,
/// PSD eigenvalue floor, unit-trace deviation, Kraus completeness.
pub const VALIDATION: f64 = 1e-10;

/// Support tolerance: eigenvalues of unit-trace matrices at or below this
/// magnitude are treated as exact zeros when taking logarithms, below the
/// noise floor of chained eigensolves but above representational noise.
pub const SUPPORT: f64 = 1e-12;

/// Probability weights above `-WEIGHT_CLAMP` but below zero are clamped to 0.
pub const WEIGHT_CLAMP: f64 = 1e-12;

/// Residual bound on eigendecomposition reconstruction and unitarity.
pub const EIG_RESIDUAL: f64 = 1e-9;

/// Largest eigenvalue admitted to the matrix exponential; anything above
/// this must be spectrally shifted by the caller first.
pub const EXP_OVERFLOW: f64 = 700.0;

/// Smallest divergence denominator accepted by the adaptive acceleration
/// rule; below it the previous acceleration parameter is kept.
pub const ADAPTIVE_DENOMINATOR: f64 = 1e-12;

/// Floor for the adaptive acceleration parameter.
pub const GAMMA_FLOOR: f64 = 1e-6;

/// Support-inclusion residual: `rho` is considered supported inside `sigma`
/// when the mass of `rho` outside `sigma`'s support projector stays below
/// this window.
pub const SUPPORT_INCLUSION: f64 = 1e-10;
