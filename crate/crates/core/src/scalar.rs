//! Floating point abstraction for content values and sample coordinates.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Scalar type used for content values, radii and sample positions.
///
/// Geometry of dyadic cubes never goes through this type; it stays in exact
/// integer form. Implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Total for the implementing types.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// `2^e` for a real exponent.
    fn pow2(e: Self) -> Self {
        e.exp2()
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Relative comparison `a <= b` with tolerance `rel` on the larger magnitude.
pub fn le_rel<T: Real>(a: T, b: T, rel: T) -> bool {
    a <= b + rel * a.abs().max(b.abs())
}

/// `|a - b| <= rel * max(|a|, |b|)`, exact for zeros.
pub fn approx_eq_rel<T: Real>(a: T, b: T, rel: T) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}
