//! Articulated arms in R^{m+1}, the special multi-flag they carry, and the
//! RVT / EKR classification of their configurations.
//!
//! The geometric layer is generic over [`Real`] and the polynomial layer over
//! [`Coefficient`]; the aliases below fix the types used by the numerical
//! routines.

pub mod classify;
pub mod distributions;
pub mod error;
pub mod geometry;
pub mod hyperspherical;
pub mod linalg;
pub mod poly;
pub mod prolongation;
pub mod sampler;
pub mod scalar;
pub mod strata;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{validate_config, Arm, ConfigFile, Segments};
pub use poly::{derive_scalar, lie_bracket, Frame, Monomial, PolyField, PolyScalar};
pub use scalar::{Coefficient, Real};

/// Arm configuration with `f64` coordinates.
pub type ArmConfig = Arm<f64>;
/// Segment view with `f64` coordinates.
pub type SegmentRep = Segments<f64>;
/// Polynomial scalar with exact integer coefficients.
pub type ExactScalar = PolyScalar<i64>;
/// Polynomial field with exact integer coefficients.
pub type ExactField = PolyField<i64>;
/// Frame with exact integer coefficients.
pub type ExactFrame = Frame<i64>;
/// Frame with `f64` coefficients.
pub type RealFrame = Frame<f64>;
