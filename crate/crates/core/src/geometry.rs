//! Arm configurations in R^{m+1}: validation, segment view and the inner
//! products of segments that drive every classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default tolerance on the squared-length residual of each link.
pub const DEFAULT_LINK_TOL: f64 = 1e-9;

/// A configuration x_0, ..., x_k of an arm with unit links in R^{m+1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Arm<T> {
    m: usize,
    k: usize,
    points: Vec<Vec<T>>,
}

/// The same configuration seen as a base point and its unit segments
/// z_i = x_i - x_{i-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Segments<T> {
    pub base: Vec<T>,
    pub segments: Vec<Vec<T>>,
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

/// Checks the shape and link lengths of a candidate configuration.
pub fn validate_config<T: Real>(m: usize, k: usize, points: &[Vec<T>], tol: f64) -> Result<()> {
    if m < 2 {
        return Err(Error::DimensionTooSmall(m));
    }
    if k < 1 {
        return Err(Error::ArmTooShort(k));
    }
    if points.len() != k + 1 {
        return Err(Error::LengthMismatch { expected: k + 1, found: points.len() });
    }
    for (index, p) in points.iter().enumerate() {
        if p.len() != m + 1 {
            return Err(Error::PointDimension { index, expected: m + 1, found: p.len() });
        }
    }
    for i in 1..=k {
        let z = sub(&points[i], &points[i - 1]);
        let residual = (dot(&z, &z) - T::one()).abs().to_f64().unwrap_or(f64::INFINITY);
        if !(residual <= tol) {
            return Err(Error::BadLinkLength { index: i, residual });
        }
    }
    Ok(())
}

impl<T: Real> Arm<T> {
    /// Builds a configuration after validating it with tolerance `tol`.
    pub fn new(m: usize, k: usize, points: Vec<Vec<T>>, tol: f64) -> Result<Self> {
        validate_config(m, k, &points, tol)?;
        Ok(Self { m, k, points })
    }

    /// Builds a configuration with the default link tolerance, inferring
    /// `m` and `k` from the points.
    pub fn from_points(points: Vec<Vec<T>>) -> Result<Self> {
        let k = points.len().saturating_sub(1);
        let m = points.first().map_or(0, |p| p.len().saturating_sub(1));
        Self::new(m, k, points, DEFAULT_LINK_TOL)
    }

    /// The straight arm x_i = (i, 0, ..., 0).
    pub fn straight(m: usize, k: usize) -> Result<Self> {
        let points = (0..=k)
            .map(|i| {
                let mut p = vec![T::zero(); m + 1];
                p[0] = T::from_usize(i).expect("small index");
                p
            })
            .collect();
        Self::new(m, k, points, DEFAULT_LINK_TOL)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.points[i]
    }

    /// Segment z_i = x_i - x_{i-1} for i in 1..=k.
    pub fn segment(&self, i: usize) -> Vec<T> {
        sub(&self.points[i], &self.points[i - 1])
    }

    /// Ambient coordinates in block-major order x_0^1..x_0^{m+1}, x_1^1, ...
    pub fn flat(&self) -> Vec<T> {
        self.points.iter().flatten().copied().collect()
    }

    /// Rebuilds a configuration from block-major ambient coordinates.
    pub fn from_flat(m: usize, k: usize, flat: &[T], tol: f64) -> Result<Self> {
        if flat.len() != (m + 1) * (k + 1) {
            return Err(Error::DimensionMismatch { left: flat.len(), right: (m + 1) * (k + 1) });
        }
        let points = flat.chunks(m + 1).map(<[T]>::to_vec).collect();
        Self::new(m, k, points, tol)
    }

    /// ⟨x_{j+1} - x_j, x_j - x_{j-1}⟩ for j in 1..=k-1.
    pub fn a_fn(&self, j: usize) -> Result<T> {
        if j < 1 || j + 1 > self.k {
            return Err(Error::IndexOutOfRange { index: j, lo: 1, hi: self.k.saturating_sub(1) });
        }
        Ok(dot(&self.segment(j + 1), &self.segment(j)))
    }

    /// ⟨x_{i+1} - x_i, x_{j+1} - x_j⟩ for i, j in 0..=k-1.
    pub fn a_pair(&self, i: usize, j: usize) -> Result<T> {
        for idx in [i, j] {
            if idx >= self.k {
                return Err(Error::IndexOutOfRange { index: idx, lo: 0, hi: self.k - 1 });
            }
        }
        Ok(dot(&self.segment(i + 1), &self.segment(j + 1)))
    }

    /// True when every consecutive pair of segments is non-orthogonal by more than `tol`.
    pub fn is_cartan(&self, tol: f64) -> bool {
        (1..self.k).all(|j| {
            let a = self.a_fn(j).expect("index in range");
            a.abs().to_f64().unwrap_or(0.0) > tol
        })
    }

    pub fn to_segments(&self) -> Segments<T> {
        Segments {
            base: self.points[0].clone(),
            segments: (1..=self.k).map(|i| self.segment(i)).collect(),
        }
    }

    /// Inverse of [`Arm::to_segments`]; rejects segments whose norm is off by more than `tol`.
    pub fn from_segments(s: &Segments<T>, tol: f64) -> Result<Self> {
        let m = s.base.len().saturating_sub(1);
        let k = s.segments.len();
        let mut points = Vec::with_capacity(k + 1);
        points.push(s.base.clone());
        for (idx, z) in s.segments.iter().enumerate() {
            if z.len() != m + 1 {
                return Err(Error::PointDimension { index: idx + 1, expected: m + 1, found: z.len() });
            }
            let norm = dot(z, z).sqrt().to_f64().unwrap_or(f64::INFINITY);
            if !((norm - 1.0).abs() <= tol) {
                return Err(Error::NonUnitSegment { index: idx + 1, norm });
            }
            let prev = points.last().expect("base present");
            let next: Vec<T> = prev.iter().zip(z).map(|(&a, &b)| a + b).collect();
            points.push(next);
        }
        Self::new(m, k, points, 2.0 * tol + DEFAULT_LINK_TOL)
    }

    /// Configuration with the points truncated to x_0..x_j.
    pub fn truncate(&self, j: usize) -> Result<Self> {
        if j < 1 || j > self.k {
            return Err(Error::IndexOutOfRange { index: j, lo: 1, hi: self.k });
        }
        Ok(Self { m: self.m, k: j, points: self.points[..=j].to_vec() })
    }

    /// Applies an affine map x ↦ R x + t to every point.
    pub fn transform(&self, rotation: &[Vec<T>], translation: &[T]) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|p| {
                rotation
                    .iter()
                    .zip(translation)
                    .map(|(row, &t)| dot(row, p) + t)
                    .collect()
            })
            .collect();
        Self::new(self.m, self.k, points, 1e-8)
    }

    /// Converts the coordinates to another floating type.
    pub fn cast<U: Real>(&self) -> Arm<U> {
        Arm {
            m: self.m,
            k: self.k,
            points: self
                .points
                .iter()
                .map(|p| p.iter().map(|x| U::from_f64(x.to_f64().unwrap_or(f64::NAN)).unwrap_or(U::nan())).collect())
                .collect(),
        }
    }

    /// Appends a new point without validation; used by builders that guarantee unit links.
    pub(crate) fn push_unchecked(&mut self, p: Vec<T>) {
        self.points.push(p);
        self.k += 1;
    }

    pub(crate) fn from_parts_unchecked(m: usize, points: Vec<Vec<T>>) -> Self {
        let k = points.len() - 1;
        Self { m, k, points }
    }
}

/// On-disk form of a configuration: `{"m": .., "k": .., "points": [[..], ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub m: usize,
    pub k: usize,
    pub points: Vec<Vec<f64>>,
}

impl Arm<f64> {
    pub fn to_file(&self) -> ConfigFile {
        ConfigFile { m: self.m, k: self.k, points: self.points.clone() }
    }

    pub fn from_file(f: ConfigFile, tol: f64) -> Result<Self> {
        Self::new(f.m, f.k, f.points, tol)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("plain numbers serialize")
    }

    pub fn from_json(text: &str, tol: f64) -> Result<Self> {
        let f: ConfigFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(f, tol)
    }
}
