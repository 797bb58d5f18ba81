//! Scalar abstraction for the numeric core.
//!
//! Everything in this crate is written against [`Real`] so the same code can
//! be instantiated at `f32` or `f64`. The simulation harness runs at `f64`
//! (see the type aliases at the crate root); `f32` is useful mainly for
//! embedded lookup tables and for checking numerical robustness, since the
//! default series tolerances are chosen for double precision.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the numeric routines are generic over.
pub trait Real: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` constant into the working scalar type.
///
/// Panics only if the conversion is not representable, which cannot happen
/// for the finite literals this crate uses.
#[inline]
pub(crate) fn cst<R: Real>(v: f64) -> R {
    R::from_f64(v).expect("finite constant must be representable")
}
