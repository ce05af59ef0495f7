//! Rank, orthonormal bases, null spaces and principal-angle comparison of
//! column spans, all through singular value decompositions.

use nalgebra::{DMatrix, DVector};

/// Default relative threshold on singular values.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.singular_values().iter().copied().collect()
}

/// Number of singular values above `rel_tol` times the largest one.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let max = s.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * max).count()
}

/// First `r` columns of the column-pivoted QR factor of `m`, orthonormalized.
fn pivoted_basis(m: &DMatrix<f64>, r: usize) -> DMatrix<f64> {
    let rows = m.nrows();
    if r == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let q = m.clone().col_piv_qr().q();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(r);
    for j in 0..r {
        let mut v = q.column(j).into_owned();
        for b in &cols {
            let c = b.dot(&v);
            v -= b * c;
        }
        let n = v.norm();
        cols.push(v / n);
    }
    DMatrix::from_columns(&cols)
}

/// Orthonormal basis (as columns) of the column span of `m`.
///
/// The rank comes from the singular values; the basis from a column-pivoted
/// QR factorization, whose Q factor spans the column space reliably even
/// when the matrix is rank deficient.
pub fn orthonormal_basis(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    pivoted_basis(m, rank(m, rel_tol))
}

/// Orthonormal basis (as columns) of the null space of `m`.
pub fn kernel(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let row_space = if m.nrows() == 0 { DMatrix::zeros(n, 0) } else { orthonormal_basis(&m.transpose(), rel_tol) };
    if row_space.ncols() == n {
        return DMatrix::zeros(n, 0);
    }
    let complement = DMatrix::<f64>::identity(n, n) - &row_space * row_space.transpose();
    pivoted_basis(&complement, n - row_space.ncols())
}

/// Largest sine of the angle between a unit vector of span(`a`) and span(`b`),
/// given orthonormal bases. Zero when span(a) ⊂ span(b).
pub fn containment_sine(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 {
        return 0.0;
    }
    let residual = if b.ncols() == 0 { a.clone() } else { a - b * (b.transpose() * a) };
    singular_values(&residual).into_iter().fold(0.0, f64::max)
}

/// Largest principal-angle sine between two spans given orthonormal bases;
/// 1 when the dimensions differ.
pub fn max_angle_sine(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0;
    }
    containment_sine(a, b).max(containment_sine(b, a))
}

/// Principal-angle distance between the column spans of two raw matrices.
pub fn span_distance(a: &DMatrix<f64>, b: &DMatrix<f64>, rel_tol: f64) -> f64 {
    max_angle_sine(&orthonormal_basis(a, rel_tol), &orthonormal_basis(b, rel_tol))
}
