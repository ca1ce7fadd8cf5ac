//! Quantum channel capacities by alternating optimization.
//!
//! Computes the Holevo quantity of classical-quantum channels, the
//! thermodynamic capacity, the coherent information of less noisy channels,
//! and the channel mutual information with Blahut-Arimoto style iterations:
//! monotone lower bounds, an a-priori iteration budget, an a-posteriori gap
//! that certifies termination, and an adaptive acceleration heuristic.
//!
//! All internal entropies are natural (nats); conversion to bits is a
//! display concern. The numeric core is generic over the real scalar type
//! (see [`scalar::Real`]); the aliases below fix `f64`, which is what the
//! CLI and the test suites use.

pub mod channel;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod objectives;
pub mod oracles;
pub mod scalar;
pub mod state;
pub mod tol;

pub use error::{QbaError, Result};
pub use scalar::Real;

/// Complex scalar used throughout the public matrix API.
pub use num_complex::Complex;

/// Concrete `f64` aliases for the main types.
pub type ComplexMatrix64 = linalg::ComplexMatrix<f64>;
pub type HermitianMatrix64 = linalg::HermitianMatrix<f64>;
pub type EigenSystem64 = linalg::EigenSystem<f64>;
pub type DensityOperator64 = state::DensityOperator<f64>;
pub type ProbabilityVector64 = state::ProbabilityVector<f64>;
pub type GibbsSpec64 = state::GibbsSpec<f64>;
pub type KrausChannel64 = channel::KrausChannel<f64>;
pub type CqChannel64 = channel::CqChannel<f64>;

pub type ObjectiveSpec64 = engine::ObjectiveSpec<f64>;
pub type SolverConfig64 = engine::SolverConfig<f64>;
pub type CapacityResult64 = engine::CapacityResult<f64>;
