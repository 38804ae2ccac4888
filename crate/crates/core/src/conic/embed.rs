//! Real symmetric embedding of complex Hermitian matrices.
//!
//! `embed(A) = [[Re A, -Im A], [Im A, Re A]]`. For Hermitian `A` and `W`,
//! `tr(A W) = tr(embed(A) embed(W)) / 2`, and `A` is PSD iff `embed(A)` is.
//!
//! A PSD program variable `X` of size `2T` need not carry the block
//! structure: [`extract_hermitian`] maps any PSD `X` to the PSD Hermitian
//! matrix `W = ((X11 + X22) + i (X21 - X12)) / 2`, which satisfies
//! `tr(A W) = tr(embed(A) X) / 2` for every Hermitian `A`. Structured
//! embeddings round-trip exactly.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::ConicError;
use crate::linalg::{hermitian_defect, CMat};

/// Relative Hermitian defect accepted by [`hermitian_embed`].
pub const HERMITIAN_TOL: f64 = 1e-10;

pub fn hermitian_embed(a: &CMat) -> Result<DMatrix<f64>, ConicError> {
    if !a.is_square() {
        return Err(ConicError::Malformed("embedding needs a square matrix".into()));
    }
    let defect = hermitian_defect(a);
    if defect > HERMITIAN_TOL {
        return Err(ConicError::NotHermitian(defect));
    }
    let n = a.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = a[(r, c)];
            out[(r, c)] = z.re;
            out[(r + n, c + n)] = z.re;
            out[(r, c + n)] = -z.im;
            out[(r + n, c)] = z.im;
        }
    }
    Ok(out)
}

/// Inverse of [`hermitian_embed`], extended to unstructured symmetric input.
pub fn extract_hermitian(x: &DMatrix<f64>) -> CMat {
    let n = x.nrows() / 2;
    assert_eq!(x.nrows(), 2 * n, "embedding has even dimension");
    CMat::from_fn(n, n, |r, c| {
        let re = (x[(r, c)] + x[(r + n, c + n)]) / 2.0;
        let im = (x[(r + n, c)] - x[(r, c + n)]) / 2.0;
        Complex64::new(re, im)
    })
}

/// Coefficient matrix `C` with `tr(A W) = tr(C X)` under [`extract_hermitian`].
pub fn trace_coefficients(a: &CMat) -> Result<DMatrix<f64>, ConicError> {
    Ok(hermitian_embed(a)?.scale(0.5))
}
