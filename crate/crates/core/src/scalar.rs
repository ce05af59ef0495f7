//! Scalar traits shared by the geometric and polynomial layers.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Floating-point type used for coordinates: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` constant into this type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Coefficient ring for polynomial scalars and fields.
///
/// Integer rings give exact identities; floating types are used for
/// evaluation-heavy work.
pub trait Coefficient:
    Num + Clone + Neg<Output = Self> + ToPrimitive + FromPrimitive + Debug + Send + Sync + 'static
{
    /// Coefficient as `f64`, used when evaluating at numeric points.
    fn as_f64(&self) -> f64 {
        self.to_f64().expect("coefficient representable as f64")
    }

    /// Small integer constant in this ring.
    fn int(n: i64) -> Self {
        Self::from_i64(n).expect("small integer representable")
    }
}

impl Coefficient for f64 {}
impl Coefficient for f32 {}
impl Coefficient for i64 {}
impl Coefficient for i128 {}
