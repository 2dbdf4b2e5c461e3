use std::fmt;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar type the laboratory computes with: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Convert an `f64` constant into `T`.
pub(crate) fn lit<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("constant representable in scalar type")
}
