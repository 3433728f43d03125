//! Scalar abstraction for the numerical core.
//!
//! Every geometric routine in this crate is generic over [`Real`], a thin
//! bundle of the `num-traits` capabilities the kernels actually use.  The
//! crate root exports `f64`-concrete aliases (`TensorField64`, ...) which are
//! what the command-line tool and the file formats speak; `f32` is supported
//! for experimentation at reduced precision.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::{Product, Sum};
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by all kernels in this crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Product
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand conversion from an `f64` literal into the working scalar type.
///
/// Panics only if the target type cannot represent any `f64` at all, which
/// does not happen for the provided impls.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal must convert into the scalar type")
}
