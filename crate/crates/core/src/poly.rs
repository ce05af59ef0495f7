//! Sparse multivariate polynomials and polynomial vector fields on an
//! ambient space R^n, with exact differentiation and Lie brackets.
//!
//! Coefficients live in any [`Coefficient`] ring: integer rings make the
//! identities of the arm geometry exact, `f64` is used for evaluation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Coefficient;

/// Exponent vector. Ordered by total degree, then lexicographically
/// (graded lexicographic order).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    degree: u32,
    exps: Box<[u8]>,
}

impl Monomial {
    pub fn one(dim: usize) -> Self {
        Self { degree: 0, exps: vec![0; dim].into_boxed_slice() }
    }

    pub fn var(dim: usize, i: usize) -> Self {
        let mut exps = vec![0; dim];
        exps[i] = 1;
        Self { degree: 1, exps: exps.into_boxed_slice() }
    }

    pub fn from_exponents(exps: &[u8]) -> Self {
        Self { degree: exps.iter().map(|&e| u32::from(e)).sum(), exps: exps.into() }
    }

    pub fn exponents(&self) -> &[u8] {
        &self.exps
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    fn mul(&self, other: &Self) -> Self {
        let exps: Box<[u8]> = self
            .exps
            .iter()
            .zip(other.exps.iter())
            .map(|(&a, &b)| a.checked_add(b).expect("exponent overflow"))
            .collect();
        Self { degree: self.degree + other.degree, exps }
    }

    /// Variables with nonzero exponent, as (index, exponent).
    pub fn support(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.exps.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e))
    }
}

/// Polynomial scalar on R^dim.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyScalar<T> {
    dim: usize,
    terms: BTreeMap<Monomial, T>,
}

impl<T: Coefficient> PolyScalar<T> {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: T) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(Monomial::one(dim), c);
        p
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, T::one())
    }

    /// The coordinate function u_i.
    pub fn var(dim: usize, i: usize) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(Monomial::var(dim, i), T::one());
        p
    }

    /// Builds a polynomial from explicit terms; zero coefficients are dropped.
    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Monomial, T)>) -> Self {
        let mut p = Self::zero(dim);
        for (mono, c) in terms {
            assert_eq!(mono.exps.len(), dim, "monomial length must equal ambient dimension");
            p.add_term(mono, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &T)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    fn add_term(&mut self, mono: Monomial, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&mono);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(mono, c);
            }
        }
    }

    fn check_dim(&self, other_dim: usize) -> Result<()> {
        if self.dim != other_dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other_dim });
        }
        Ok(())
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.clone() * c.clone());
        }
        out
    }

    /// Partial derivative with respect to coordinate `i`.
    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            let e = m.exps[i];
            if e == 0 {
                continue;
            }
            let mut exps = m.exps.clone();
            exps[i] -= 1;
            let mono = Monomial { degree: m.degree - 1, exps };
            out.add_term(mono, c.clone() * T::int(i64::from(e)));
        }
        out
    }

    /// Coordinates this polynomial actually depends on.
    pub fn support_vars(&self) -> Vec<usize> {
        let mut used = vec![false; self.dim];
        for m in self.terms.keys() {
            for (i, _) in m.support() {
                used[i] = true;
            }
        }
        used.iter().enumerate().filter(|(_, &u)| u).map(|(i, _)| i).collect()
    }

    /// Numeric value at `p`.
    pub fn evaluate(&self, p: &[f64]) -> Result<f64> {
        self.check_dim(p.len())?;
        Ok(self
            .terms
            .iter()
            .map(|(m, c)| {
                m.support().fold(c.as_f64(), |acc, (i, e)| acc * p[i].powi(i32::from(e)))
            })
            .sum())
    }

    /// Converts every coefficient into another ring.
    pub fn map_coeffs<U: Coefficient>(&self) -> PolyScalar<U> {
        PolyScalar {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), U::from_f64(c.as_f64()).expect("convertible coefficient")))
                .collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        let mut acc: std::collections::HashMap<Monomial, T> = std::collections::HashMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mono = ma.mul(mb);
                let c = ca.clone() * cb.clone();
                match acc.get_mut(&mono) {
                    Some(v) => *v = v.clone() + c,
                    None => {
                        acc.insert(mono, c);
                    }
                }
            }
        }
        Ok(Self { dim: self.dim, terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() })
    }

    /// One term per line, `coeff * x_i^r^e ...`, leading term first.
    /// Coordinates are named by block `i = u / (m+1)` and component `r = u % (m+1) + 1`.
    pub fn dump(&self, block: usize) -> String {
        let mut out = String::new();
        for (m, c) in self.terms.iter().rev() {
            let _ = write!(out, "{:?}", c);
            let mut first = true;
            for (u, e) in m.support() {
                out.push_str(if first { " * " } else { " " });
                first = false;
                let _ = write!(out, "x_{}^{}^{}", u / block, u % block + 1, e);
            }
            out.push('\n');
        }
        if out.is_empty() {
            out.push_str("0\n");
        }
        out
    }
}

impl<T: Coefficient> Add for &PolyScalar<T> {
    type Output = PolyScalar<T>;
    fn add(self, rhs: Self) -> PolyScalar<T> {
        self.try_add(rhs).expect("matching dimensions")
    }
}

impl<T: Coefficient> Sub for &PolyScalar<T> {
    type Output = PolyScalar<T>;
    fn sub(self, rhs: Self) -> PolyScalar<T> {
        self.try_add(&-rhs).expect("matching dimensions")
    }
}

impl<T: Coefficient> Mul for &PolyScalar<T> {
    type Output = PolyScalar<T>;
    fn mul(self, rhs: Self) -> PolyScalar<T> {
        self.try_mul(rhs).expect("matching dimensions")
    }
}

impl<T: Coefficient> Neg for &PolyScalar<T> {
    type Output = PolyScalar<T>;
    fn neg(self) -> PolyScalar<T> {
        self.scale(&-T::one())
    }
}

/// Polynomial vector field Σ X^r ∂/∂u_r on R^dim.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyField<T> {
    dim: usize,
    components: Vec<PolyScalar<T>>,
}

impl<T: Coefficient> PolyField<T> {
    pub fn zero(dim: usize) -> Self {
        Self { dim, components: vec![PolyScalar::zero(dim); dim] }
    }

    /// The coordinate field ∂/∂u_i.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut f = Self::zero(dim);
        f.components[i] = PolyScalar::one(dim);
        f
    }

    pub fn from_components(components: Vec<PolyScalar<T>>) -> Result<Self> {
        let dim = components.len();
        for c in &components {
            c.check_dim(dim)?;
        }
        Ok(Self { dim, components })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[PolyScalar<T>] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &PolyScalar<T> {
        &self.components[i]
    }

    pub fn set_component(&mut self, i: usize, p: PolyScalar<T>) {
        assert_eq!(p.dim, self.dim);
        self.components[i] = p;
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(PolyScalar::is_zero)
    }

    pub fn num_terms(&self) -> usize {
        self.components.iter().map(PolyScalar::num_terms).sum()
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim != other {
            return Err(Error::DimensionMismatch { left: self.dim, right: other });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        let components =
            self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect();
        Ok(Self { dim: self.dim, components })
    }

    /// The field f·X.
    pub fn mul_scalar(&self, f: &PolyScalar<T>) -> Result<Self> {
        self.check_dim(f.dim)?;
        let components = self.components.iter().map(|c| c * f).collect();
        Ok(Self { dim: self.dim, components })
    }

    pub fn scale(&self, c: &T) -> Self {
        Self { dim: self.dim, components: self.components.iter().map(|p| p.scale(c)).collect() }
    }

    pub fn evaluate(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(p.len())?;
        self.components.iter().map(|c| c.evaluate(p)).collect()
    }

    pub fn map_coeffs<U: Coefficient>(&self) -> PolyField<U> {
        PolyField { dim: self.dim, components: self.components.iter().map(PolyScalar::map_coeffs).collect() }
    }

    /// One line per nonzero component term, prefixed with the component index.
    pub fn dump(&self, block: usize) -> String {
        let mut out = String::new();
        for (u, c) in self.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let _ = writeln!(out, "d/dx_{}^{}:", u / block, u % block + 1);
            out.push_str(&c.dump(block));
        }
        out
    }
}

impl<T: Coefficient> Add for &PolyField<T> {
    type Output = PolyField<T>;
    fn add(self, rhs: Self) -> PolyField<T> {
        self.try_add(rhs).expect("matching dimensions")
    }
}

impl<T: Coefficient> Sub for &PolyField<T> {
    type Output = PolyField<T>;
    fn sub(self, rhs: Self) -> PolyField<T> {
        self.try_add(&rhs.scale(&-T::one())).expect("matching dimensions")
    }
}

/// Df(X) = Σ_r X^r ∂f/∂u_r.
pub fn derive_scalar<T: Coefficient>(f: &PolyScalar<T>, x: &PolyField<T>) -> Result<PolyScalar<T>> {
    f.check_dim(x.dim)?;
    let mut out = PolyScalar::zero(f.dim);
    for r in f.support_vars() {
        if x.components[r].is_zero() {
            continue;
        }
        out = &out + &(&x.components[r] * &f.partial(r));
    }
    Ok(out)
}

/// [X, Y] = (DY)X - (DX)Y.
pub fn lie_bracket<T: Coefficient>(x: &PolyField<T>, y: &PolyField<T>) -> Result<PolyField<T>> {
    x.check_dim(y.dim)?;
    let mut components = Vec::with_capacity(x.dim);
    for i in 0..x.dim {
        let a = derive_scalar(&y.components[i], x)?;
        let b = derive_scalar(&x.components[i], y)?;
        components.push(&a - &b);
    }
    Ok(PolyField { dim: x.dim, components })
}

/// Ordered family of polynomial fields generating a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<T> {
    fields: Vec<PolyField<T>>,
}

impl<T: Coefficient> Frame<T> {
    pub fn new(fields: Vec<PolyField<T>>) -> Result<Self> {
        let Some(first) = fields.first() else {
            return Err(Error::DimensionMismatch { left: 0, right: 0 });
        };
        let dim = first.dim;
        for f in &fields {
            f.check_dim(dim)?;
        }
        Ok(Self { fields })
    }

    pub fn dim(&self) -> usize {
        self.fields[0].dim
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn fields(&self) -> &[PolyField<T>] {
        &self.fields
    }

    pub fn into_fields(self) -> Vec<PolyField<T>> {
        self.fields
    }

    /// Evaluation matrix: one column per field.
    pub fn evaluate(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let cols = self.fields.iter().map(|f| f.evaluate(p).map(DVector::from_vec)).collect::<Result<Vec<_>>>()?;
        Ok(DMatrix::from_columns(&cols))
    }

    pub fn compile(&self) -> CompiledFrame {
        CompiledFrame { fields: self.fields.iter().map(CompiledField::new).collect() }
    }
}

/// Flattened polynomial ready for repeated evaluation of value and gradient.
#[derive(Debug, Clone)]
pub struct CompiledScalar {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledScalar {
    pub fn new<T: Coefficient>(p: &PolyScalar<T>) -> Self {
        Self {
            terms: p
                .terms
                .iter()
                .map(|(m, c)| (c.as_f64(), m.support().map(|(i, e)| (i, i32::from(e))).collect()))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn value(&self, p: &[f64]) -> f64 {
        self.terms.iter().map(|(c, vars)| vars.iter().fold(*c, |acc, &(i, e)| acc * p[i].powi(e))).sum()
    }

    /// Value, with the gradient accumulated into `grad`.
    pub fn value_grad(&self, p: &[f64], grad: &mut [f64]) -> f64 {
        let mut value = 0.0;
        let mut factors: Vec<f64> = Vec::new();
        let mut prefix: Vec<f64> = Vec::new();
        for (c, vars) in &self.terms {
            factors.clear();
            factors.extend(vars.iter().map(|&(i, e)| p[i].powi(e)));
            prefix.clear();
            let mut acc = *c;
            for f in &factors {
                prefix.push(acc);
                acc *= f;
            }
            value += acc;
            let mut suffix = 1.0;
            for idx in (0..vars.len()).rev() {
                let (i, e) = vars[idx];
                let d = f64::from(e) * p[i].powi(e - 1);
                grad[i] += prefix[idx] * d * suffix;
                suffix *= factors[idx];
            }
        }
        value
    }
}

/// Compiled vector field.
#[derive(Debug, Clone)]
pub struct CompiledField {
    components: Vec<CompiledScalar>,
}

impl CompiledField {
    pub fn new<T: Coefficient>(f: &PolyField<T>) -> Self {
        Self { components: f.components.iter().map(CompiledScalar::new).collect() }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn value(&self, p: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.components.len(), self.components.iter().map(|c| c.value(p)))
    }

    /// Value and Jacobian (row i = gradient of component i).
    pub fn jet(&self, p: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.components.len();
        let mut jac = DMatrix::zeros(n, p.len());
        let mut val = DVector::zeros(n);
        let mut grad = vec![0.0; p.len()];
        for (i, c) in self.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            grad.iter_mut().for_each(|g| *g = 0.0);
            val[i] = c.value_grad(p, &mut grad);
            for (j, g) in grad.iter().enumerate() {
                jac[(i, j)] = *g;
            }
        }
        (val, jac)
    }
}

/// Compiled frame with pointwise bracket evaluation.
#[derive(Debug, Clone)]
pub struct CompiledFrame {
    fields: Vec<CompiledField>,
}

/// Values and Jacobians of every field of a frame at one point.
#[derive(Debug, Clone)]
pub struct FrameJet {
    pub values: Vec<DVector<f64>>,
    pub jacobians: Vec<DMatrix<f64>>,
}

impl FrameJet {
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_columns(&self.values)
    }

    /// [E_a, E_b](p) = DE_b(p) E_a(p) - DE_a(p) E_b(p).
    pub fn bracket(&self, a: usize, b: usize) -> DVector<f64> {
        &self.jacobians[b] * &self.values[a] - &self.jacobians[a] * &self.values[b]
    }
}

impl CompiledFrame {
    pub fn from_fields(fields: Vec<CompiledField>) -> Self {
        Self { fields }
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn matrix(&self, p: &[f64]) -> DMatrix<f64> {
        let cols: Vec<_> = self.fields.iter().map(|f| f.value(p)).collect();
        DMatrix::from_columns(&cols)
    }

    pub fn jet(&self, p: &[f64]) -> FrameJet {
        let (values, jacobians) = self.fields.iter().map(|f| f.jet(p)).unzip();
        FrameJet { values, jacobians }
    }
}
