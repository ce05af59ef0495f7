//! Defining equations of RVT strata, their Jacobian ranks, and the exact
//! polynomial identities behind the tangency recursion.
//!
//! For a block V T^l with the vertical at level i, the reduced equations are
//! φ̄_j = ⟨x_{i+j} - x_{i+j-1}, x_{i+j-1} - x_{i-2}⟩ for j = 0..l; the case
//! j = 0 is 𝒜_{i-1}.

use nalgebra::DMatrix;

use crate::classify::{Letter, RvtWord};
use crate::distributions::{a_pair_poly, a_poly, gen_y, gen_y_sum, gen_z, psi_poly, y_value, Layout};
use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{derive_scalar, CompiledScalar, PolyScalar};
use crate::ArmConfig;

/// Step of the central finite-difference cross-check.
pub const FD_STEP: f64 = 1e-6;

/// Polynomial system cutting out a stratum inside the space of arms.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumSystem {
    pub word: RvtWord,
    pub m: usize,
    pub k: usize,
    /// Class equations, one per vanishing condition.
    pub equations: Vec<PolyScalar<i64>>,
    /// Human-readable description of each class equation.
    pub labels: Vec<String>,
    /// Link constraints Ψ_0, ..., Ψ_{k-1}.
    pub constraint_equations: Vec<PolyScalar<i64>>,
}

impl StratumSystem {
    fn empty(word: &RvtWord, m: usize, k: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::DimensionTooSmall(m));
        }
        if word.len() != k {
            return Err(Error::LengthMismatch { expected: k, found: word.len() });
        }
        let l = Layout::new(m, k);
        Ok(Self {
            word: word.clone(),
            m,
            k,
            equations: Vec::new(),
            labels: Vec::new(),
            constraint_equations: (0..k).map(|i| psi_poly(l, i)).collect::<Result<_>>()?,
        })
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.m, self.k)
    }

    /// Expected Jacobian rank k + codimension, when the word has depth ≤ 1.
    pub fn expected_rank(&self) -> Option<usize> {
        self.word.codimension().ok().map(|c| self.k + c)
    }

    fn all_equations(&self) -> impl Iterator<Item = &PolyScalar<i64>> {
        self.constraint_equations.iter().chain(&self.equations)
    }
}

/// φ̄_j for the block whose vertical sits at level `i`.
pub fn phi_bar(l: Layout, i: usize, j: usize) -> Result<PolyScalar<i64>> {
    if i < 2 || i + j > l.k {
        return Err(Error::IndexOutOfRange { index: i + j, lo: 2, hi: l.k });
    }
    let n = i + j - 1;
    Ok(l.inner((n + 1, n), (n, i - 2)))
}

/// Equations φ̄_0..φ̄_l of every V T^l block of a depth-1 word.
pub fn defining_equations(w: &RvtWord, m: usize, k: usize) -> Result<StratumSystem> {
    if w.depth() > 1 {
        return Err(Error::DepthExceeded(format!("{w} has depth {}", w.depth())));
    }
    let mut sys = StratumSystem::empty(w, m, k)?;
    let l = sys.layout();
    let letters = w.letters();
    for (idx, letter) in letters.iter().enumerate() {
        if letter != &Letter::V {
            continue;
        }
        let i = idx + 1;
        let tail = letters[idx + 1..].iter().take_while(|x| **x == Letter::T).count();
        for j in 0..=tail {
            sys.equations.push(phi_bar(l, i, j)?);
            sys.labels.push(format!("phi_bar[{i},{j}] = <x{} - x{}, x{} - x{}>", i + j, i + j - 1, i + j - 1, i - 2));
        }
    }
    Ok(sys)
}

/// System read off the letter plans; covers the subscripted k ≤ 4 words.
pub fn plan_equations(w: &RvtWord, m: usize, k: usize) -> Result<StratumSystem> {
    if w.depth() > 1 && k > 4 {
        return Err(Error::DepthExceeded(format!("{w} has depth {} at k = {k}", w.depth())));
    }
    let mut sys = StratumSystem::empty(w, m, k)?;
    let l = sys.layout();
    for plan in w.plans()? {
        let lv = plan.level;
        if plan.vertical {
            sys.equations.push(a_poly(l, lv - 1)?);
            sys.labels.push(format!("A{} = <x{lv} - x{}, x{} - x{}>", lv - 1, lv - 1, lv - 1, lv - 2));
        }
        for &p in &plan.zero_anchors {
            sys.equations.push(l.inner((lv, lv - 1), (lv - 1, p - 2)));
            sys.labels.push(format!("<x{lv} - x{}, x{} - x{}>", lv - 1, lv - 1, p - 2));
        }
    }
    Ok(sys)
}

/// Values of the class equations at `c`.
pub fn residuals(sys: &StratumSystem, c: &ArmConfig) -> Result<Vec<f64>> {
    let p = c.flat();
    sys.equations.iter().map(|e| e.evaluate(&p)).collect()
}

/// Analytic Jacobian of [Ψ_0..Ψ_{k-1}, class equations] at `c`.
pub fn jacobian(sys: &StratumSystem, c: &ArmConfig) -> DMatrix<f64> {
    let p = c.flat();
    let rows: Vec<_> = sys.all_equations().collect();
    let mut jac = DMatrix::zeros(rows.len(), p.len());
    let mut grad = vec![0.0; p.len()];
    for (r, eq) in rows.iter().enumerate() {
        grad.iter_mut().for_each(|g| *g = 0.0);
        CompiledScalar::new(eq).value_grad(&p, &mut grad);
        for (col, g) in grad.iter().enumerate() {
            jac[(r, col)] = *g;
        }
    }
    jac
}

/// Central finite-difference Jacobian, for cross-checking [`jacobian`].
pub fn fd_jacobian(sys: &StratumSystem, c: &ArmConfig, step: f64) -> DMatrix<f64> {
    let p = c.flat();
    let compiled: Vec<_> = sys.all_equations().map(CompiledScalar::new).collect();
    DMatrix::from_fn(compiled.len(), p.len(), |r, col| {
        let mut plus = p.clone();
        let mut minus = p.clone();
        plus[col] += step;
        minus[col] -= step;
        (compiled[r].value(&plus) - compiled[r].value(&minus)) / (2.0 * step)
    })
}

/// Measured Jacobian rank with the expectation, when there is one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodimReport {
    pub rank: usize,
    pub expected: Option<usize>,
}

impl CodimReport {
    /// Codimension of the stratum inside the space of arms.
    pub fn codimension(&self, k: usize) -> usize {
        self.rank.saturating_sub(k)
    }
}

/// Rank of the stratum Jacobian at `c`; [`Error::RankMismatch`] when a depth-1
/// expectation is not met.
pub fn verify_codimension(sys: &StratumSystem, c: &ArmConfig, rel_tol: f64) -> Result<CodimReport> {
    let rank = linalg::rank(&jacobian(sys, c), rel_tol);
    let expected = sys.expected_rank();
    if let Some(e) = expected {
        if rank != e {
            return Err(Error::RankMismatch { rank, expected: e });
        }
    }
    Ok(CodimReport { rank, expected })
}

/// Exact check of Dφ̄_j(Ŷ) = -𝒜_{i+j} φ̄_j + φ̄_{j+1} + 𝒜_{i+j} Ψ_{i+j-1}, where
/// Ŷ keeps only the 𝒵_s with s ≥ i-1 of Y_{i+j+1}.
pub fn phi_bar_identity(l: Layout, i: usize, j: usize) -> Result<bool> {
    let n = i + j + 1;
    let lhs = derive_scalar(&phi_bar(l, i, j)?, &gen_y_sum(l, i - 1, n)?)?;
    let a = a_poly(l, i + j)?;
    let rhs = &(&phi_bar(l, i, j + 1)? - &(&a * &phi_bar(l, i, j)?)) + &(&a * &psi_poly(l, i + j - 1)?);
    Ok(lhs == rhs)
}

/// Checks the tangency recursion for every V T^l block of a depth-1 word:
/// exactly as polynomials and numerically at `c`, where the link constraints
/// hold. At configurations with φ̄_0(c) = 0 the full Y_{i+j+1} is checked too.
/// Returns `false` when the word has no block long enough to check.
pub fn verify_recursion(w: &RvtWord, c: &ArmConfig, tol: f64) -> Result<bool> {
    if w.depth() > 1 {
        return Err(Error::DepthExceeded(format!("{w} has depth {}", w.depth())));
    }
    let k = c.k();
    if w.len() != k {
        return Err(Error::LengthMismatch { expected: k, found: w.len() });
    }
    let l = Layout::new(c.m(), k);
    let p = c.flat();
    let mut checked = false;
    for (idx, letter) in w.letters().iter().enumerate() {
        if letter != &Letter::V {
            continue;
        }
        let i = idx + 1;
        let tail = w.letters()[idx + 1..].iter().take_while(|x| **x == Letter::T).count();
        for j in 0..=tail {
            if i + j + 1 > k {
                break;
            }
            checked = true;
            if !phi_bar_identity(l, i, j)? {
                return Err(Error::IdentityViolated(j));
            }
            let phi = CompiledScalar::new(&phi_bar(l, i, j)?);
            let mut grad = vec![0.0; p.len()];
            let phi_val = phi.value_grad(&p, &mut grad);
            let expected = phi_bar(l, i, j + 1)?.evaluate(&p)? - a_poly::<i64>(l, i + j)?.evaluate(&p)? * phi_val;
            let along = |y: Vec<f64>| grad.iter().zip(&y).map(|(g, v)| g * v).sum::<f64>();
            let truncated = along(y_value(l, &p, i - 1, i + j + 1, 0.0)?);
            if (truncated - expected).abs() > tol {
                return Err(Error::IdentityViolated(j));
            }
            if phi_bar(l, i, 0)?.evaluate(&p)?.abs() <= tol {
                let full = along(y_value(l, &p, 0, i + j + 1, 0.0)?);
                if (full - expected).abs() > tol {
                    return Err(Error::IdentityViolated(j));
                }
            }
        }
    }
    Ok(checked)
}

/// Exact check of the five derivative rules for 𝒜_{i,j} (i > j) along the 𝒵_h:
/// vanishing off the blocks i, i+1, j, j+1; D𝒜_{i,j}(𝒵_i) = -𝒜_{i,j} for
/// j ≠ i-1; D𝒜_{i,i-1}(𝒵_i) = 1 + Ψ_i - 𝒜_{i,i-1}; D𝒜_{i,j}(𝒵_{i+1}) =
/// 𝒜_{i+1,j}; D𝒜_{i,j}(𝒵_{j+1}) = 𝒜_{i,j+1} for j ≠ i-1. Returns the
/// number (1 to 5) of the first rule that fails.
pub fn a_pair_identities(l: Layout) -> Result<Option<usize>> {
    let one = PolyScalar::<i64>::one(l.dim());
    for i in 0..l.k {
        for j in 0..i {
            let aij = a_pair_poly::<i64>(l, i, j)?;
            let d = |h: usize| -> Result<PolyScalar<i64>> { derive_scalar(&aij, &gen_z(l, h)?) };
            for h in 0..l.k {
                if ![i, i + 1, j, j + 1].contains(&h) && !d(h)?.is_zero() {
                    return Ok(Some(1));
                }
            }
            if j + 1 != i && d(i)? != -&aij {
                return Ok(Some(2));
            }
            if j + 1 == i && d(i)? != &(&one + &psi_poly(l, i)?) - &aij {
                return Ok(Some(3));
            }
            if i + 1 < l.k && d(i + 1)? != a_pair_poly(l, i + 1, j)? {
                return Ok(Some(4));
            }
            if j + 1 != i && d(j + 1)? != a_pair_poly(l, i, j + 1)? {
                return Ok(Some(5));
            }
        }
    }
    Ok(None)
}

/// Checks Y_n = 𝒜_{n-1} Y_{n-1} + 𝒵_{n-1} against the expanded sum for n = 1..=l.k.
pub fn y_recursion_identity(l: Layout) -> Result<bool> {
    for n in 1..=l.k {
        if gen_y::<i64>(l, n)? != gen_y_sum(l, 0, n)? {
            return Ok(false);
        }
    }
    Ok(true)
}
