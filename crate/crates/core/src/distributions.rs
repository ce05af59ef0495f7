//! Explicit polynomial vector fields on the ambient space of arm
//! configurations, the frames of the rank-(m+1) distribution and its flag,
//! pointwise ranks and Cauchy characteristics, and EKR normal forms.
//!
//! Ambient coordinates are block-major: coordinate `i*(m+1) + r` is the
//! r-th component (0-based) of the point x_i.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{lie_bracket, CompiledFrame, Frame, FrameJet, PolyField, PolyScalar};
use crate::scalar::Coefficient;

/// Largest ambient dimension (k+1)(m+1) accepted by [`build_flag`].
pub const FLAG_SIZE_LIMIT: usize = 25;

/// Index bookkeeping for the ambient space of arms with `k` links in R^{m+1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub m: usize,
    pub k: usize,
}

impl Layout {
    pub fn new(m: usize, k: usize) -> Self {
        Self { m, k }
    }

    pub fn dim(&self) -> usize {
        (self.m + 1) * (self.k + 1)
    }

    /// Coordinate index of x_i^r with 0-based component `r`.
    pub fn index(&self, i: usize, r: usize) -> usize {
        i * (self.m + 1) + r
    }

    pub fn x<T: Coefficient>(&self, i: usize, r: usize) -> PolyScalar<T> {
        PolyScalar::var(self.dim(), self.index(i, r))
    }

    /// The polynomial x_a^r - x_b^r.
    pub fn diff<T: Coefficient>(&self, a: usize, b: usize, r: usize) -> PolyScalar<T> {
        &self.x(a, r) - &self.x(b, r)
    }

    /// The polynomial ⟨x_a - x_b, x_c - x_d⟩.
    pub fn inner<T: Coefficient>(&self, (a, b): (usize, usize), (c, d): (usize, usize)) -> PolyScalar<T> {
        let mut acc = PolyScalar::zero(self.dim());
        for r in 0..=self.m {
            acc = &acc + &(&self.diff(a, b, r) * &self.diff(c, d, r));
        }
        acc
    }

    fn check_block(&self, i: usize, lo: usize, hi: usize) -> Result<()> {
        if i < lo || i > hi {
            return Err(Error::IndexOutOfRange { index: i, lo, hi });
        }
        Ok(())
    }
}

/// 𝒜_j = ⟨x_{j+1} - x_j, x_j - x_{j-1}⟩ for 1 ≤ j ≤ k-1.
pub fn a_poly<T: Coefficient>(l: Layout, j: usize) -> Result<PolyScalar<T>> {
    l.check_block(j, 1, l.k.saturating_sub(1))?;
    Ok(l.inner((j + 1, j), (j, j - 1)))
}

/// 𝒜_{i,j} = ⟨x_{i+1} - x_i, x_{j+1} - x_j⟩ for 0 ≤ i, j ≤ k-1.
pub fn a_pair_poly<T: Coefficient>(l: Layout, i: usize, j: usize) -> Result<PolyScalar<T>> {
    l.check_block(i, 0, l.k - 1)?;
    l.check_block(j, 0, l.k - 1)?;
    Ok(l.inner((i + 1, i), (j + 1, j)))
}

/// Link constraint Ψ_i = ||x_{i+1} - x_i||² - 1 for 0 ≤ i ≤ k-1.
pub fn psi_poly<T: Coefficient>(l: Layout, i: usize) -> Result<PolyScalar<T>> {
    l.check_block(i, 0, l.k - 1)?;
    Ok(&l.inner((i + 1, i), (i + 1, i)) - &PolyScalar::one(l.dim()))
}

/// 𝒵_i = Σ_r (x_{i+1}^r - x_i^r) ∂/∂x_i^r for 0 ≤ i ≤ k-1.
pub fn gen_z<T: Coefficient>(l: Layout, i: usize) -> Result<PolyField<T>> {
    l.check_block(i, 0, l.k - 1)?;
    let mut f = PolyField::zero(l.dim());
    for r in 0..=l.m {
        f.set_component(l.index(i, r), l.diff(i + 1, i, r));
    }
    Ok(f)
}

/// 𝒩_i = Σ_r (x_{i+1}^r - x_i^r)(∂/∂x_{i+1}^r - ∂/∂x_i^r) for 0 ≤ i ≤ k-1.
pub fn gen_n<T: Coefficient>(l: Layout, i: usize) -> Result<PolyField<T>> {
    l.check_block(i, 0, l.k - 1)?;
    let mut f = PolyField::zero(l.dim());
    for r in 0..=l.m {
        let z: PolyScalar<T> = l.diff(i + 1, i, r);
        f.set_component(l.index(i + 1, r), z.clone());
        f.set_component(l.index(i, r), -&z);
    }
    Ok(f)
}

/// 𝒱_n = Σ_s (x_n^s - x_{n-1}^s) ∂/∂x_n^s for 1 ≤ n ≤ k.
pub fn gen_v<T: Coefficient>(l: Layout, n: usize) -> Result<PolyField<T>> {
    l.check_block(n, 1, l.k)?;
    let mut f = PolyField::zero(l.dim());
    for r in 0..=l.m {
        f.set_component(l.index(n, r), l.diff(n, n - 1, r));
    }
    Ok(f)
}

/// Y_n built by the recursion Y_1 = 𝒵_0, Y_n = 𝒜_{n-1} Y_{n-1} + 𝒵_{n-1}.
pub fn gen_y<T: Coefficient>(l: Layout, n: usize) -> Result<PolyField<T>> {
    gen_y_offset(l, n, T::zero())
}

/// Y_n with every recursion coefficient 𝒜_{j} replaced by 𝒜_{j} + `offset`
/// at the last step only. Used as a negative control for span checks.
pub fn gen_y_offset<T: Coefficient>(l: Layout, n: usize, offset: T) -> Result<PolyField<T>> {
    l.check_block(n, 1, l.k)?;
    let mut y = gen_z(l, 0)?;
    for step in 2..=n {
        let mut coeff = a_poly(l, step - 1)?;
        if step == n {
            coeff = &coeff + &PolyScalar::constant(l.dim(), offset.clone());
        }
        y = &y.mul_scalar(&coeff)? + &gen_z(l, step - 1)?;
    }
    Ok(y)
}

/// Σ_{i=start}^{n-1} (Π_{j=i+1}^{n-1} 𝒜_j) 𝒵_i, expanded term by term.
/// With `start = 0` this is the closed form of Y_n.
pub fn gen_y_sum<T: Coefficient>(l: Layout, start: usize, n: usize) -> Result<PolyField<T>> {
    l.check_block(n, 1, l.k)?;
    let mut acc = PolyField::zero(l.dim());
    for i in start..n {
        let mut coeff = PolyScalar::one(l.dim());
        for j in (i + 1)..n {
            coeff = &coeff * &a_poly(l, j)?;
        }
        acc = &acc + &gen_z(l, i)?.mul_scalar(&coeff)?;
    }
    Ok(acc)
}

/// X_n = Y_n + 𝒱_n.
pub fn gen_x<T: Coefficient>(l: Layout, n: usize) -> Result<PolyField<T>> {
    Ok(&gen_y(l, n)? + &gen_v(l, n)?)
}

/// Copies the block-`level` components of `f` onto every later block, so the
/// points after x_level move rigidly with it.
pub fn lift_rigid<T: Coefficient>(l: Layout, f: &PolyField<T>, level: usize) -> PolyField<T> {
    let mut out = f.clone();
    for i in (level + 1)..=l.k {
        for r in 0..=l.m {
            out.set_component(l.index(i, r), f.component(l.index(level, r)).clone());
        }
    }
    out
}

fn dk_generators<T: Coefficient>(l: Layout, level: usize, y: &PolyField<T>) -> Result<Vec<PolyField<T>>> {
    (0..=l.m)
        .map(|r| {
            let mut g = y.mul_scalar(&l.diff(level, level - 1, r))?;
            let idx = l.index(level, r);
            g.set_component(idx, &g.component(idx).clone() + &PolyScalar::one(l.dim()));
            Ok(g)
        })
        .collect()
}

/// Generators (x_k^r - x_{k-1}^r) Y_k + ∂/∂x_k^r, r = 1..m+1, of the
/// rank-(m+1) distribution on the space of arms with k links.
pub fn frame_dk<T: Coefficient>(m: usize, k: usize) -> Result<Frame<T>> {
    frame_dk_offset(m, k, T::zero())
}

/// [`frame_dk`] built from [`gen_y_offset`]; `offset = 0` gives the true frame.
pub fn frame_dk_offset<T: Coefficient>(m: usize, k: usize, offset: T) -> Result<Frame<T>> {
    if m < 2 {
        return Err(Error::DimensionTooSmall(m));
    }
    if k < 1 {
        return Err(Error::ArmTooShort(k));
    }
    let l = Layout::new(m, k);
    Frame::new(dk_generators(l, k, &gen_y_offset(l, k, offset)?)?)
}

/// Value at `p` of Σ_{s=start}^{n-1} (Π_{t=s+1}^{n-1} 𝒜_t) 𝒵_s, accumulated
/// through the recursion, with `offset` added to the coefficient of the last
/// step as in [`gen_y_offset`]. With `start = 0` this is Y_n(p).
pub fn y_value(l: Layout, p: &[f64], start: usize, n: usize, offset: f64) -> Result<Vec<f64>> {
    l.check_block(n, 1, l.k)?;
    l.check_block(start, 0, n - 1)?;
    if p.len() != l.dim() {
        return Err(Error::DimensionMismatch { left: p.len(), right: l.dim() });
    }
    let seg = |i: usize| -> Vec<f64> { (0..=l.m).map(|r| p[l.index(i + 1, r)] - p[l.index(i, r)]).collect() };
    let mut y = vec![0.0; l.dim()];
    for s in start..n {
        let z = seg(s);
        if s > start {
            let prev = seg(s - 1);
            let mut coeff: f64 = z.iter().zip(&prev).map(|(a, b)| a * b).sum();
            if s == n - 1 {
                coeff += offset;
            }
            y.iter_mut().for_each(|v| *v *= coeff);
        }
        for r in 0..=l.m {
            y[l.index(s, r)] += z[r];
        }
    }
    Ok(y)
}

/// Value at `p` of [`frame_dk_offset`], one generator per column, computed
/// without building the polynomial frame.
pub fn frame_dk_value(m: usize, k: usize, p: &[f64], offset: f64) -> Result<DMatrix<f64>> {
    if m < 2 {
        return Err(Error::DimensionTooSmall(m));
    }
    if k < 1 {
        return Err(Error::ArmTooShort(k));
    }
    let l = Layout::new(m, k);
    let y = y_value(l, p, 0, k, offset)?;
    Ok(DMatrix::from_fn(l.dim(), m + 1, |row, r| {
        let z = p[l.index(k, r)] - p[l.index(k - 1, r)];
        z * y[row] + if row == l.index(k, r) { 1.0 } else { 0.0 }
    }))
}

/// Level-`level` generators placed on the ambient space of `l`, with the
/// later points carried rigidly. Level 0 gives the translations.
pub fn frame_level<T: Coefficient>(l: Layout, level: usize) -> Result<Vec<PolyField<T>>> {
    l.check_block(level, 0, l.k)?;
    let raw = if level == 0 {
        (0..=l.m).map(|r| PolyField::coordinate(l.dim(), l.index(0, r))).collect()
    } else {
        dk_generators(l, level, &gen_y(l, level)?)?
    };
    Ok(raw.iter().map(|f| lift_rigid(l, f, level)).collect())
}

fn vertical_generators<T: Coefficient>(l: Layout, level: usize) -> Result<Vec<PolyField<T>>> {
    let v = gen_v(l, level)?;
    (0..=l.m)
        .map(|r| {
            let mut g = v.mul_scalar(&-&l.diff(level, level - 1, r))?;
            let idx = l.index(level, r);
            g.set_component(idx, &g.component(idx).clone() + &PolyScalar::one(l.dim()));
            Ok(g)
        })
        .collect()
}

/// Projections Π_k(∂/∂x_k^r) = ∂/∂x_k^r - (x_k^r - x_{k-1}^r) 𝒱_k spanning
/// the tangent space of the last fiber sphere.
pub fn frame_vertical<T: Coefficient>(m: usize, k: usize) -> Result<Frame<T>> {
    if k < 1 {
        return Err(Error::ArmTooShort(k));
    }
    Frame::new(vertical_generators(Layout::new(m, k), k)?)
}

/// Fiber-tangent generators of level `level` with later points carried rigidly.
pub fn frame_vertical_level<T: Coefficient>(l: Layout, level: usize) -> Result<Vec<PolyField<T>>> {
    l.check_block(level, 1, l.k)?;
    Ok(vertical_generators(l, level)?.iter().map(|f| lift_rigid(l, f, level)).collect())
}

/// The flag D_k ⊂ D_{k-1} ⊂ ... ⊂ D_0 of the distribution on arms with k links.
#[derive(Debug, Clone)]
pub struct FlagSpec<T> {
    pub m: usize,
    pub k: usize,
    /// `frames[i]` spans D_{k-i}.
    pub frames: Vec<Frame<T>>,
}

impl<T: Coefficient> FlagSpec<T> {
    /// Frame spanning D_j.
    pub fn member(&self, j: usize) -> &Frame<T> {
        &self.frames[self.k - j]
    }

    /// Rank of D_j at regular points: (k-j+1)m+1.
    pub fn expected_rank(&self, j: usize) -> usize {
        (self.k - j + 1) * self.m + 1
    }
}

/// Builds every flag member additively: D_{j-1} = D_j + level-(j-1) generators.
pub fn build_flag<T: Coefficient>(m: usize, k: usize) -> Result<FlagSpec<T>> {
    if m < 2 {
        return Err(Error::DimensionTooSmall(m));
    }
    if k < 1 {
        return Err(Error::ArmTooShort(k));
    }
    let l = Layout::new(m, k);
    if l.dim() > FLAG_SIZE_LIMIT {
        return Err(Error::SizeLimitExceeded { size: l.dim(), limit: FLAG_SIZE_LIMIT });
    }
    let mut fields = frame_level(l, k)?;
    let mut frames = vec![Frame::new(fields.clone())?];
    for j in (0..k).rev() {
        fields.extend(frame_level(l, j)?);
        frames.push(Frame::new(fields.clone())?);
    }
    Ok(FlagSpec { m, k, frames })
}

/// Numerical rank of a frame at `p`.
pub fn rank_at<T: Coefficient>(f: &Frame<T>, p: &[f64], rel_tol: f64) -> Result<usize> {
    Ok(linalg::rank(&f.evaluate(p)?, rel_tol))
}

/// Greedy choice of frame columns independent at the evaluation point.
fn independent_columns(m: &DMatrix<f64>, rel_tol: f64) -> Vec<usize> {
    let scale = (0..m.ncols()).map(|c| m.column(c).norm()).fold(0.0, f64::max);
    let mut chosen: Vec<usize> = Vec::new();
    let mut basis: Vec<nalgebra::DVector<f64>> = Vec::new();
    for c in 0..m.ncols() {
        let mut v = m.column(c).into_owned();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dot(&v);
                v -= b * proj;
            }
        }
        let n = v.norm();
        if n > rel_tol.sqrt() * scale.max(f64::MIN_POSITIVE) {
            basis.push(v / n);
            chosen.push(c);
        }
    }
    chosen
}

/// Pointwise Cauchy characteristic from a precomputed jet.
pub fn cauchy_char_from_jet(jet: &FrameJet, rel_tol: f64) -> Result<DMatrix<f64>> {
    let e = jet.matrix();
    let sel = independent_columns(&e, rel_tol);
    if sel.is_empty() {
        return Err(Error::RankDeficientFrame);
    }
    let n = e.nrows();
    let r = sel.len();
    let q = linalg::orthonormal_basis(&e.select_columns(&sel), rel_tol);
    let perp = DMatrix::<f64>::identity(n, n) - &q * q.transpose();
    let mut map = DMatrix::zeros(n * r, r);
    for (ai, &a) in sel.iter().enumerate() {
        for (bi, &b) in sel.iter().enumerate() {
            let v = &perp * jet.bracket(a, b);
            map.view_mut((bi * n, ai), (n, 1)).copy_from(&v);
        }
    }
    let ker = linalg::kernel(&map, rel_tol);
    if ker.ncols() == 0 {
        return Ok(DMatrix::zeros(n, 0));
    }
    Ok(linalg::orthonormal_basis(&(e.select_columns(&sel) * ker), rel_tol))
}

/// Orthonormal basis of {Σ c_a E_a(p) : Σ c_a [E_a, E_b](p) ∈ span E(p) for all b}.
///
/// Fields dependent at `p` are dropped first; the remaining ones generate the
/// distribution near `p`, so the pointwise test is unchanged.
pub fn cauchy_char_at<T: Coefficient>(f: &Frame<T>, p: &[f64], rel_tol: f64) -> Result<DMatrix<f64>> {
    if p.len() != f.dim() {
        return Err(Error::DimensionMismatch { left: p.len(), right: f.dim() });
    }
    cauchy_char_from_jet(&f.compile().jet(p), rel_tol)
}

/// Span of the frame values together with all pairwise brackets at `p`.
pub fn lie_square_at(frame: &CompiledFrame, p: &[f64]) -> DMatrix<f64> {
    let jet = frame.jet(p);
    let mut cols = jet.values.clone();
    for a in 0..jet.values.len() {
        for b in (a + 1)..jet.values.len() {
            cols.push(jet.bracket(a, b));
        }
    }
    DMatrix::from_columns(&cols)
}

/// Polynomial fields generating the Lie square: the frame plus pairwise brackets.
pub fn lie_square<T: Coefficient>(f: &Frame<T>) -> Result<Frame<T>> {
    let mut fields = f.fields().to_vec();
    for a in 0..f.len() {
        for b in (a + 1)..f.len() {
            let br = lie_bracket(&f.fields()[a], &f.fields()[b])?;
            if !br.is_zero() {
                fields.push(br);
            }
        }
    }
    Frame::new(fields)
}

/// Checks the least-upward-jump rule on an EKR sequence for step `m`.
pub fn check_jump_rule(jseq: &[usize], m: usize) -> Result<()> {
    let mut max = 0;
    for (pos, &j) in jseq.iter().enumerate() {
        let allowed = if pos == 0 { 1 } else { (max + 1).min(m + 1) };
        if j < 1 || j > allowed {
            return Err(Error::RuleViolation { position: pos + 1 });
        }
        max = max.max(j);
    }
    Ok(())
}

/// EKR pseudo-normal form with all shift constants zero.
///
/// Coordinates: t, then x^0_1..x^0_m, then x^l_1..x^l_m for l = 1..k, giving
/// ambient dimension (k+1)m+1. Returns (Z'_1, ∂/∂x^k_1, ..., ∂/∂x^k_m).
pub fn ekr_normal_form<T: Coefficient>(jseq: &[usize], m: usize) -> Result<Frame<T>> {
    check_jump_rule(jseq, m)?;
    let k = jseq.len();
    let dim = (k + 1) * m + 1;
    let var = |l: usize, a: usize| 1 + l * m + (a - 1);
    let mut z: Vec<PolyField<T>> = std::iter::once(PolyField::coordinate(dim, 0))
        .chain((1..=m).map(|a| PolyField::coordinate(dim, var(0, a))))
        .collect();
    for (idx, &j) in jseq.iter().enumerate() {
        let l = idx + 1;
        let mut first = z[j - 1].clone();
        for i in 1..j {
            first = &first + &z[i - 1].mul_scalar(&PolyScalar::var(dim, var(l, i)))?;
        }
        for i in j..=m {
            first = &first + &z[i].mul_scalar(&PolyScalar::var(dim, var(l, i)))?;
        }
        let mut next = vec![first];
        next.extend((1..=m).map(|a| PolyField::coordinate(dim, var(l, a))));
        z = next;
    }
    Frame::new(z)
}
