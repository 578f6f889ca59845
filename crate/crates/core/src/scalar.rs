//! Scalar abstraction over the floating-point type used by the core math.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the core numerics are generic over (f32 or f64).
pub trait Scalar:
    Float + FromPrimitive + Sum + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + Sum + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

/// Converts an f64 literal into the working scalar type.
#[inline]
pub fn lit<S: Scalar>(v: f64) -> S {
    S::from_f64(v).expect("literal out of range for scalar type")
}
