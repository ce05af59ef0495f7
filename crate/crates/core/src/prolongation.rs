//! Spherical prolongation of arm configurations: appending a link along a
//! unit direction of the rank-(m+1) distribution, the pushforward of the
//! prolonged distribution, and the antipodal flip of the last link.

use nalgebra::{DMatrix, DVector};

use crate::distributions::frame_dk_value;
use crate::error::{Error, Result};
use crate::geometry::dot;
use crate::linalg;
use crate::poly::{CompiledFrame, Frame};
use crate::scalar::Coefficient;
use crate::ArmConfig;

/// Tolerance on the norm of a fiber direction.
pub const DIRECTION_TOL: f64 = 1e-12;
/// Default bound on the principal-angle sine in pushforward checks.
pub const DEFAULT_PUSHFORWARD_TOL: f64 = 1e-6;

/// Unit coefficients of a direction in the orthonormal frame of the distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberDirection {
    coeffs: Vec<f64>,
}

impl FiberDirection {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        let norm = dot(&coeffs, &coeffs).sqrt();
        if !((norm - 1.0).abs() <= DIRECTION_TOL) {
            return Err(Error::NonUnitDirection(norm));
        }
        Ok(Self { coeffs })
    }

    /// Rescales a non-zero vector to unit length.
    pub fn normalized(v: &[f64]) -> Result<Self> {
        let norm = dot(v, v).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NonUnitDirection(norm));
        }
        Self::new(v.iter().map(|x| x / norm).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

/// Appends x_{k+1} = x_k + d.
pub fn prolong_config(c: &ArmConfig, d: &FiberDirection) -> Result<ArmConfig> {
    if d.coeffs.len() != c.m() + 1 {
        return Err(Error::DimensionMismatch { left: d.coeffs.len(), right: c.m() + 1 });
    }
    let mut out = c.clone();
    let next = c.point(c.k()).iter().zip(&d.coeffs).map(|(a, b)| a + b).collect();
    out.push_unchecked(next);
    Ok(out)
}

/// The antipodal point on the top fiber: x_k ↦ 2 x_{k-1} - x_k.
pub fn flip_last(c: &ArmConfig) -> ArmConfig {
    let k = c.k();
    let mut points = c.points().to_vec();
    points[k] = c.point(k - 1).iter().zip(c.point(k)).map(|(a, b)| 2.0 * a - b).collect();
    ArmConfig::from_parts_unchecked(c.m(), points)
}

/// Result of a pushforward comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushforwardReport {
    /// Largest principal-angle sine between the two spans.
    pub max_sine: f64,
    pub pushed_rank: usize,
    pub target_rank: usize,
}

/// Frame the pushed span is compared with.
#[derive(Debug, Clone)]
enum Target {
    /// The frame of the longer arm evaluated pointwise, with the offset of
    /// [`frame_dk_offset`](crate::distributions::frame_dk_offset).
    Offset(f64),
    Compiled(CompiledFrame),
}

/// Pushforward checks for arms with k+1 links in R^{m+1}.
#[derive(Debug, Clone)]
pub struct PushforwardCheck {
    m: usize,
    k: usize,
    target: Target,
}

impl PushforwardCheck {
    /// Checks against the true frame of the longer arm.
    pub fn new(m: usize, k: usize) -> Result<Self> {
        Self::with_offset(m, k, 0.0)
    }

    /// Checks against the frame whose last recursion coefficient is shifted
    /// by `offset`. Any non-zero offset gives a wrong frame.
    pub fn with_offset(m: usize, k: usize, offset: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::DimensionTooSmall(m));
        }
        Ok(Self { m, k, target: Target::Offset(offset) })
    }

    /// Checks against an arbitrary frame on the space of arms with k+1 links.
    pub fn with_target<T: Coefficient>(m: usize, k: usize, target: &Frame<T>) -> Result<Self> {
        if target.dim() != (m + 1) * (k + 2) {
            return Err(Error::DimensionMismatch { left: target.dim(), right: (m + 1) * (k + 2) });
        }
        Ok(Self { m, k, target: Target::Compiled(target.compile()) })
    }

    /// Columns spanning the image of the prolonged distribution at `c`.
    ///
    /// The preimage is (q, ν) with q the first k links and ν = z_{k+1}. The
    /// prolonged distribution there is spanned by the fiber directions (0, w),
    /// w ⟂ ν, and the lift of Σ ν^r E_r(q). The prolongation map is
    /// (q, ν) ↦ (q, x_k + ν), whose derivative is (δq, δν) ↦ (δq, δx_k + δν).
    pub fn pushed_span(&self, c: &ArmConfig) -> Result<DMatrix<f64>> {
        self.check_shape(c)?;
        let n = self.m + 1;
        let k = self.k;
        let nu = c.segment(k + 1);
        let dim = n * (k + 2);
        let nu_col = DVector::from_column_slice(&nu);
        let horizontal: DVector<f64> =
            if k == 0 { nu_col } else { frame_dk_value(self.m, k, &c.truncate(k)?.flat(), 0.0)? * nu_col };
        let mut lift = DVector::zeros(dim);
        lift.rows_mut(0, horizontal.len()).copy_from(&horizontal);
        for r in 0..n {
            lift[(k + 1) * n + r] = horizontal[k * n + r];
        }
        let mut cols = vec![lift];
        let nu_row = DMatrix::from_row_slice(1, n, &nu);
        let fiber = linalg::kernel(&nu_row, linalg::DEFAULT_REL_TOL);
        for j in 0..fiber.ncols() {
            let mut v = DVector::zeros(dim);
            v.rows_mut((k + 1) * n, n).copy_from(&fiber.column(j));
            cols.push(v);
        }
        Ok(DMatrix::from_columns(&cols))
    }

    /// Compares the pushed span with the target span at `c`.
    pub fn check(&self, c: &ArmConfig, rel_tol: f64) -> Result<PushforwardReport> {
        let pushed = self.pushed_span(c)?;
        let frame = match &self.target {
            Target::Offset(offset) => frame_dk_value(self.m, self.k + 1, &c.flat(), *offset)?,
            Target::Compiled(f) => f.matrix(&c.flat()),
        };
        let a = linalg::orthonormal_basis(&pushed, linalg::DEFAULT_REL_TOL);
        let b = linalg::orthonormal_basis(&frame, linalg::DEFAULT_REL_TOL);
        let report =
            PushforwardReport { max_sine: linalg::max_angle_sine(&a, &b), pushed_rank: a.ncols(), target_rank: b.ncols() };
        if !(report.max_sine <= rel_tol) {
            return Err(Error::SpanMismatch(report.max_sine));
        }
        Ok(report)
    }

    fn check_shape(&self, c: &ArmConfig) -> Result<()> {
        if c.m() != self.m {
            return Err(Error::DimensionMismatch { left: c.m(), right: self.m });
        }
        if c.k() != self.k + 1 {
            return Err(Error::LengthMismatch { expected: self.k + 1, found: c.k() });
        }
        Ok(())
    }
}

/// Columns spanning the image of the prolonged distribution at `c`.
pub fn pushed_span(c: &ArmConfig) -> Result<DMatrix<f64>> {
    PushforwardCheck::new(c.m(), c.k() - 1)?.pushed_span(c)
}

/// Compares [`pushed_span`] with the span of `target` evaluated at `c`.
pub fn verify_pushforward_against<T: Coefficient>(c: &ArmConfig, target: &Frame<T>, rel_tol: f64) -> Result<PushforwardReport> {
    PushforwardCheck::with_target(c.m(), c.k() - 1, target)?.check(c, rel_tol)
}

/// Checks that prolongation carries the prolonged distribution onto the
/// rank-(m+1) distribution of the longer arm at `c`.
pub fn verify_pushforward(c: &ArmConfig, rel_tol: f64) -> Result<PushforwardReport> {
    PushforwardCheck::new(c.m(), c.k() - 1)?.check(c, rel_tol)
}
