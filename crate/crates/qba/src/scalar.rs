//! Scalar abstraction underlying all matrix work.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type the library is generic over.
///
/// Implemented for `f32` and `f64`. The shipped aliases at the crate root and
/// the CLI use `f64`; tolerance windows are specified at `f64` scale, so the
/// `f32` instantiation is approximate and mainly useful for experiments.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum<Self>
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Convert an `f64` constant into the working scalar type.
#[inline]
pub fn real<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("f64 constant representable in scalar type")
}

/// Convert a dimension into the working scalar type.
#[inline]
pub fn real_of_usize<R: Real>(n: usize) -> R {
    R::from_usize(n).expect("usize representable in scalar type")
}
