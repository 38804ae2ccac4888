//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// `v v^H`.
pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// Real part of `v^H A v`. Equal to `tr(A v v^H)`.
pub fn quad_form(a: &CMat, v: &CVec) -> f64 {
    (v.adjoint() * a * v)[(0, 0)].re
}

/// `tr(A B)` keeping only the real part.
pub fn trace_product(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc.re
}

pub fn real_trace(a: &CMat) -> f64 {
    a.diagonal().iter().map(|z| z.re).sum()
}

/// Frobenius norm of `A - A^H` relative to the Frobenius norm of `A`.
pub fn hermitian_defect(a: &CMat) -> f64 {
    let scale = a.norm();
    if scale == 0.0 {
        return 0.0;
    }
    (a - a.adjoint()).norm() / scale
}

pub fn is_hermitian(a: &CMat, rel_tol: f64) -> bool {
    a.is_square() && hermitian_defect(a) <= rel_tol
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are unit-norm eigenvectors matching `values`.
    pub vectors: CMat,
}

pub fn hermitian_eigen(a: &CMat) -> HermitianEigen {
    // symmetrize first so round-off in the input cannot leak into the result
    let sym = (a + a.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermitianEigen { values, vectors }
}

/// Principal square root of a PSD matrix; negative eigenvalues are clipped to zero.
pub fn psd_sqrt(a: &CMat) -> CMat {
    let eig = hermitian_eigen(a);
    let n = a.nrows();
    let mut out = CMat::zeros(n, n);
    for (i, &lambda) in eig.values.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        let u = eig.vectors.column(i).into_owned();
        out += outer(&u).scale(lambda.sqrt());
    }
    out
}

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues are set to zero.
pub fn psd_project(a: &CMat) -> CMat {
    let eig = hermitian_eigen(a);
    if eig.values.last().map_or(true, |&l| l >= 0.0) {
        return (a + a.adjoint()).scale(0.5);
    }
    let mut out = CMat::zeros(a.nrows(), a.ncols());
    for (i, &lambda) in eig.values.iter().enumerate() {
        if lambda > 0.0 {
            out += outer(&eig.vectors.column(i).into_owned()).scale(lambda);
        }
    }
    out
}

/// Orthonormal basis (as columns) of the orthogonal complement of the span of `rows`.
///
/// Directions whose Gram eigenvalue is at most `rel_tol` times the largest count as null.
pub fn null_space_basis(rows: &[CVec], dim: usize, rel_tol: f64) -> CMat {
    if rows.is_empty() {
        return CMat::identity(dim, dim);
    }
    // Span of the vectors = range of the Gram-like matrix sum v v^H.
    let mut gram = CMat::zeros(dim, dim);
    for v in rows {
        gram += outer(v);
    }
    let eig = hermitian_eigen(&gram);
    let top = eig.values[0].max(0.0);
    let cut = rel_tol * top;
    let kept: Vec<usize> = (0..dim).filter(|&i| eig.values[i] <= cut).collect();
    let mut basis = CMat::zeros(dim, kept.len());
    for (c, &i) in kept.iter().enumerate() {
        basis.set_column(c, &eig.vectors.column(i));
    }
    basis
}
