//! Hyperspherical coordinates on the segments of an arm, the chart Jacobian,
//! and the frame of the rank-(m+1) distribution written in these coordinates.
//!
//! For angles θ = (θ^1, ..., θ^m) the unit vector Φ(θ) ∈ S^m has components
//! z^{m+1} = cos θ^1, z^{m+1-t} = sin θ^1 ⋯ sin θ^t cos θ^{t+1} for
//! 1 ≤ t ≤ m-1, and z^1 = sin θ^1 ⋯ sin θ^m. Angle indices are 0-based in
//! code.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::distributions::frame_dk_value;
use crate::error::{Error, Result};
use crate::linalg;
use crate::geometry::{dot, Arm, DEFAULT_LINK_TOL};
use crate::scalar::Real;

/// Guard on |sin θ^j| (j < m) below which the chart is considered singular.
pub const CHART_DELTA: f64 = 1e-6;

/// Base point and one block of m angles per segment.
#[derive(Debug, Clone, PartialEq)]
pub struct HsPoint<T> {
    pub x0: Vec<T>,
    pub thetas: Vec<Vec<T>>,
}

/// Factor of a component of Φ: the angle index and whether it is a cosine.
fn component_factors(m: usize, r: usize) -> Vec<(usize, bool)> {
    if r == 0 {
        return (0..m).map(|i| (i, false)).collect();
    }
    let t = m - r;
    let mut f: Vec<(usize, bool)> = (0..t).map(|i| (i, false)).collect();
    f.push((t, true));
    f
}

fn trig<T: Real>(theta: T, cos: bool) -> T {
    if cos {
        theta.cos()
    } else {
        theta.sin()
    }
}

/// Φ(θ) ∈ S^m.
pub fn sphere_point<T: Real>(theta: &[T]) -> Vec<T> {
    let m = theta.len();
    (0..=m)
        .map(|r| component_factors(m, r).iter().fold(T::one(), |acc, &(i, c)| acc * trig(theta[i], c)))
        .collect()
}

/// Partial derivatives ∂Φ/∂θ^j, j = 0..m-1.
pub fn sphere_partials<T: Real>(theta: &[T]) -> Vec<Vec<T>> {
    let m = theta.len();
    (0..m)
        .map(|j| {
            (0..=m)
                .map(|r| {
                    let factors = component_factors(m, r);
                    if !factors.iter().any(|&(i, _)| i == j) {
                        return T::zero();
                    }
                    factors.iter().fold(T::one(), |acc, &(i, c)| {
                        if i == j {
                            acc * if c { -theta[i].sin() } else { theta[i].cos() }
                        } else {
                            acc * trig(theta[i], c)
                        }
                    })
                })
                .collect()
        })
        .collect()
}

/// Angles of a unit vector; `Err(j)` (0-based angle) when sin θ^j is within
/// [`CHART_DELTA`] of zero for some j < m-1.
pub fn sphere_angles<T: Real>(z: &[T]) -> std::result::Result<Vec<T>, usize> {
    let m = z.len() - 1;
    let two_pi = T::lit(2.0 * std::f64::consts::PI);
    let mut theta = Vec::with_capacity(m);
    for t in 0..m - 1 {
        let rest = z[..m - t].iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt();
        let angle = rest.atan2(z[m - t]);
        if angle.sin().abs() <= T::lit(CHART_DELTA) {
            return Err(t);
        }
        theta.push(angle);
    }
    let mut last = z[0].atan2(z[1]);
    if last < T::zero() {
        last = last + two_pi;
    }
    if last >= two_pi {
        last = last - two_pi;
    }
    theta.push(last);
    Ok(theta)
}

/// Configuration with z_i = Φ(θ_{i-1}).
pub fn hs_forward<T: Real>(h: &HsPoint<T>) -> Result<Arm<T>> {
    let m = h.x0.len() - 1;
    let mut points = vec![h.x0.clone()];
    for block in &h.thetas {
        if block.len() != m {
            return Err(Error::DimensionMismatch { left: block.len(), right: m });
        }
        let z = sphere_point(block);
        let prev = points.last().expect("base present");
        let next = prev.iter().zip(&z).map(|(&a, &b)| a + b).collect();
        points.push(next);
    }
    Arm::new(m, h.thetas.len(), points, DEFAULT_LINK_TOL)
}

/// Angles of every segment of `c`.
pub fn hs_inverse<T: Real>(c: &Arm<T>) -> Result<HsPoint<T>> {
    let thetas = (1..=c.k())
        .map(|i| sphere_angles(&c.segment(i)).map_err(|j| Error::ChartSingular { block: i, angle: j + 1 }))
        .collect::<Result<Vec<_>>>()?;
    Ok(HsPoint { x0: c.point(0).to_vec(), thetas })
}

/// A_i = ⟨Φ(θ_{i-1}), Φ(θ_i)⟩ for 1 ≤ i ≤ k-1.
pub fn hs_a<T: Real>(h: &HsPoint<T>, i: usize) -> Result<T> {
    let k = h.thetas.len();
    if i < 1 || i + 1 > k {
        return Err(Error::IndexOutOfRange { index: i, lo: 1, hi: k.saturating_sub(1) });
    }
    Ok(dot(&sphere_point(&h.thetas[i - 1]), &sphere_point(&h.thetas[i])))
}

fn check_regular<T: Real>(h: &HsPoint<T>) -> Result<()> {
    for (b, block) in h.thetas.iter().enumerate() {
        for (j, &t) in block.iter().enumerate().take(block.len().saturating_sub(1)) {
            if t.sin().abs() <= T::lit(CHART_DELTA) {
                return Err(Error::ChartSingular { block: b + 1, angle: j + 1 });
            }
        }
    }
    Ok(())
}

/// Dimension of the chart: m+1 base coordinates and m angles per segment.
pub fn chart_dim(m: usize, k: usize) -> usize {
    m + 1 + k * m
}

/// X^0_{k-1}, X^1_{k-1}, ..., X^m_{k-1} at `h`, as vectors in chart
/// coordinates (x_0, θ_0, ..., θ_{k-1}).
///
/// X^0_{k-1} = Σ_i f^i Z_i with f^i = Π_{j=i+1}^{k-1} A_j. Z_0 translates the
/// base along Φ(θ_0); for i ≥ 1, Z_i turns θ_{i-1} along the tangential part
/// of Φ(θ_i), with components ⟨∂_jΦ(θ_{i-1}), Φ(θ_i)⟩ / ||∂_jΦ(θ_{i-1})||².
pub fn hs_frame<T: Real>(h: &HsPoint<T>) -> Result<Vec<Vec<T>>> {
    check_regular(h)?;
    let m = h.x0.len() - 1;
    let k = h.thetas.len();
    let dim = chart_dim(m, k);
    let phis: Vec<Vec<T>> = h.thetas.iter().map(|t| sphere_point(t)).collect();
    let block = |b: usize| m + 1 + b * m;

    let mut x0 = vec![T::zero(); dim];
    for i in 0..k {
        let f = ((i + 1)..k).fold(T::one(), |acc, j| acc * dot(&phis[j - 1], &phis[j]));
        if i == 0 {
            for r in 0..=m {
                x0[r] = x0[r] + f * phis[0][r];
            }
        } else {
            let partials = sphere_partials(&h.thetas[i - 1]);
            for (j, d) in partials.iter().enumerate() {
                let b = dot(d, &phis[i]) / dot(d, d);
                x0[block(i - 1) + j] = x0[block(i - 1) + j] + f * b;
            }
        }
    }
    let mut out = vec![x0];
    for a in 0..m {
        let mut v = vec![T::zero(); dim];
        v[block(k - 1) + a] = T::one();
        out.push(v);
    }
    Ok(out)
}

/// Jacobian of (x_0, θ) ↦ (x_0, ..., x_k) with x_i = x_0 + Σ_{b<i} Φ(θ_b);
/// rows are ambient coordinates, columns chart coordinates.
pub fn chart_jacobian<T: Real>(h: &HsPoint<T>) -> Vec<Vec<T>> {
    let m = h.x0.len() - 1;
    let k = h.thetas.len();
    let rows = (m + 1) * (k + 1);
    let mut jac = vec![vec![T::zero(); chart_dim(m, k)]; rows];
    for i in 0..=k {
        for r in 0..=m {
            jac[i * (m + 1) + r][r] = T::one();
        }
    }
    for (b, theta) in h.thetas.iter().enumerate() {
        for (j, d) in sphere_partials(theta).iter().enumerate() {
            for i in (b + 1)..=k {
                for r in 0..=m {
                    jac[i * (m + 1) + r][m + 1 + b * m + j] = d[r];
                }
            }
        }
    }
    jac
}

/// Jacobian of (ρ, θ) ↦ ρΦ(θ): columns Φ, ρ ∂_1Φ, ..., ρ ∂_mΦ.
pub fn sphere_jacobian<T: Real>(theta: &[T], rho: T) -> Vec<Vec<T>> {
    let phi = sphere_point(theta);
    let partials = sphere_partials(theta);
    (0..phi.len())
        .map(|r| std::iter::once(phi[r]).chain(partials.iter().map(|d| rho * d[r])).collect())
        .collect()
}

/// Inverse of [`sphere_jacobian`]: rows Φ and ∂_jΦ / (ρ ||∂_jΦ||²).
///
/// The columns of the forward Jacobian are orthogonal but not of unit length
/// (||∂_jΦ|| = sin θ^1 ⋯ sin θ^{j-1}), so the plain transpose is an inverse
/// only after this rescaling.
pub fn sphere_jacobian_inverse<T: Real>(theta: &[T], rho: T) -> Vec<Vec<T>> {
    let phi = sphere_point(theta);
    let partials = sphere_partials(theta);
    std::iter::once(phi)
        .chain(partials.iter().map(|d| {
            let s = rho * dot(d, d);
            d.iter().map(|&x| x / s).collect()
        }))
        .collect()
}

impl<T: Real> HsPoint<T> {
    pub fn m(&self) -> usize {
        self.x0.len() - 1
    }

    pub fn k(&self) -> usize {
        self.thetas.len()
    }
}

/// On-disk form of a chart point: `{"m": .., "k": .., "x0": [..], "thetas": [[..], ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HsFile {
    pub m: usize,
    pub k: usize,
    pub x0: Vec<f64>,
    pub thetas: Vec<Vec<f64>>,
}

impl HsPoint<f64> {
    pub fn to_file(&self) -> HsFile {
        HsFile { m: self.m(), k: self.k(), x0: self.x0.clone(), thetas: self.thetas.clone() }
    }

    /// Checks the declared sizes against the data.
    pub fn from_file(f: HsFile) -> Result<Self> {
        if f.m < 2 {
            return Err(Error::DimensionTooSmall(f.m));
        }
        if f.x0.len() != f.m + 1 {
            return Err(Error::PointDimension { index: 0, expected: f.m + 1, found: f.x0.len() });
        }
        if f.thetas.len() != f.k {
            return Err(Error::LengthMismatch { expected: f.k, found: f.thetas.len() });
        }
        if let Some((i, b)) = f.thetas.iter().enumerate().find(|(_, b)| b.len() != f.m) {
            return Err(Error::PointDimension { index: i + 1, expected: f.m, found: b.len() });
        }
        Ok(Self { x0: f.x0, thetas: f.thetas })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("plain numbers serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: HsFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(f)
    }
}

/// Largest principal-angle sine between the chart frame pushed to ambient
/// coordinates and the ambient rank-(m+1) frame at `hs_forward(h)`.
pub fn frame_agreement(h: &HsPoint<f64>) -> Result<f64> {
    let c = hs_forward(h)?;
    let chart = hs_frame(h)?;
    let jac = chart_jacobian(h);
    let dim = jac.len();
    let pushed = DMatrix::from_fn(dim, chart.len(), |r, a| dot(&jac[r], &chart[a]));
    let ambient = frame_dk_value(c.m(), c.k(), &c.flat(), 0.0)?;
    Ok(linalg::span_distance(&pushed, &ambient, linalg::DEFAULT_REL_TOL))
}
