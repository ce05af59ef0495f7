//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors reported by configuration handling, frames, classification,
/// sampling and the verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension parameter m = {0} is below the minimum of 2")]
    DimensionTooSmall(usize),

    #[error("arm length k = {0} is below the minimum of 1")]
    ArmTooShort(usize),

    #[error("link {index} has squared-length residual {residual:e}")]
    BadLinkLength { index: usize, residual: f64 },

    #[error("expected {expected} points, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("point {index} has {found} coordinates, expected {expected}")]
    PointDimension { index: usize, expected: usize, found: usize },

    #[error("segment {index} has norm {norm}, expected 1")]
    NonUnitSegment { index: usize, norm: f64 },

    #[error("index {index} outside the valid range {lo}..={hi}")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("ambient size {size} exceeds the limit of {limit}")]
    SizeLimitExceeded { size: usize, limit: usize },

    #[error("frame has rank zero at the evaluation point")]
    RankDeficientFrame,

    #[error("EKR sequence breaks the jump rule at position {position}")]
    RuleViolation { position: usize },

    #[error("chart singular at block {block}, angle {angle}")]
    ChartSingular { block: usize, angle: usize },

    #[error("depth exceeds the supported range: {0}")]
    DepthExceeded(String),

    #[error("condition pattern at level {level} matches no enumerated class: {pattern}")]
    UnclassifiableDegeneracy { level: usize, pattern: String },

    #[error("letter at level {level} cannot be realized: {reason}")]
    InfeasibleLetter { level: usize, reason: String },

    #[error("rejection budget of {budget} draws exhausted at level {level}")]
    RejectionBudgetExceeded { level: usize, budget: usize },

    #[error("Jacobian rank {rank} differs from expected {expected}")]
    RankMismatch { rank: usize, expected: usize },

    #[error("recursion identity fails at step {0}")]
    IdentityViolated(usize),

    #[error("spans differ: max principal-angle sine {0:e}")]
    SpanMismatch(f64),

    #[error("fiber direction has norm {0}, expected 1")]
    NonUnitDirection(f64),

    #[error("parse error: {0}")]
    Parse(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
