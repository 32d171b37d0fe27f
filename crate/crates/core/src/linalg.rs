//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::linalg::Schur;
use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::Matrix;

const SCHUR_MAX_ITERS: usize = 10_000;

/// Largest real part over the eigenvalues of a square matrix.
pub fn spectral_abscissa(m: &Matrix) -> Result<f64> {
    let (r, c) = m.shape();
    if r != c {
        return Err(Error::DimensionMismatch {
            what: "spectral abscissa operand",
            expected: (r, r),
            found: (r, c),
        });
    }
    if r == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITERS).ok_or(Error::EigenFailure)?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `(M + M^T) / 2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub fn eigmin(m: &Matrix) -> f64 {
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn eigmax(m: &Matrix) -> f64 {
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Frobenius inner product `Tr(A^T B)`.
pub fn frob_inner(a: &Matrix, b: &Matrix) -> f64 {
    a.dot(b)
}

pub fn is_symmetric(m: &Matrix, tol: f64) -> bool {
    m.is_square() && (m - m.transpose()).norm() <= tol * (1.0 + m.norm())
}

pub fn check_shape(what: &'static str, m: &Matrix, rows: usize, cols: usize) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::DimensionMismatch {
            what,
            expected: (rows, cols),
            found: m.shape(),
        });
    }
    Ok(())
}
