//! Dense Lyapunov solver based on the Kronecker-sum formulation.
//!
//! The equation `L X + X L^T + C = 0` is vectorized column-major into
//! `(I (x) L + L (x) I) vec(X) = -vec(C)` and solved by partial-pivot LU with
//! one step of iterative refinement. Cost is O(n^6) time and O(n^4) memory,
//! so the state dimension is capped by [`Tolerances::max_dim`].

use crate::error::{Error, Result};
use crate::linalg::{check_shape, is_symmetric, spectral_abscissa, symmetrize};
use crate::{Matrix, Tolerances};

/// Which Lyapunov equation to solve for a closed-loop matrix `A_cl`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LyapunovSide {
    /// `A_cl^T X + X A_cl + RHS = 0` (cost matrices such as `P_K`).
    TransposeLeft,
    /// `A_cl X + X A_cl^T + RHS = 0` (Gramians such as `Y_K`).
    PlainLeft,
}

/// Solves the Lyapunov equation selected by `side`.
///
/// `a_cl` must be Hurwitz with spectral abscissa below `-tol.margin` and
/// `rhs` symmetric. The returned solution is symmetrized.
pub fn solve_lyapunov(a_cl: &Matrix, rhs: &Matrix, side: LyapunovSide, tol: &Tolerances) -> Result<Matrix> {
    let n = a_cl.nrows();
    check_shape("closed-loop matrix", a_cl, n, n)?;
    check_shape("Lyapunov right-hand side", rhs, n, n)?;
    if n > tol.max_dim {
        return Err(Error::TooLarge { n, max: tol.max_dim });
    }
    if !is_symmetric(rhs, 1e-12) {
        return Err(Error::NotSymmetric("Lyapunov right-hand side"));
    }
    let abscissa = spectral_abscissa(a_cl)?;
    if abscissa >= -tol.margin {
        return Err(Error::NotHurwitz { abscissa });
    }
    solve_hurwitz(a_cl, rhs, side, tol)
}

/// Same as [`solve_lyapunov`] but trusts the caller that `a_cl` is Hurwitz.
pub(crate) fn solve_hurwitz(a_cl: &Matrix, rhs: &Matrix, side: LyapunovSide, tol: &Tolerances) -> Result<Matrix> {
    let n = a_cl.nrows();
    if n > tol.max_dim {
        return Err(Error::TooLarge { n, max: tol.max_dim });
    }
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let l = match side {
        LyapunovSide::TransposeLeft => a_cl.transpose(),
        LyapunovSide::PlainLeft => a_cl.clone(),
    };
    let nn = n * n;
    let mut kron = Matrix::zeros(nn, nn);
    for j in 0..n {
        for i in 0..n {
            let row = i + j * n;
            for k in 0..n {
                kron[(row, k + j * n)] += l[(i, k)];
                kron[(row, i + k * n)] += l[(j, k)];
            }
        }
    }
    let b = nalgebra::DVector::from_iterator(nn, rhs.iter().map(|c| -c));

    let lu = kron.clone().lu();
    let u = lu.u();
    let (mut dmin, mut dmax) = (f64::INFINITY, 0.0_f64);
    for d in u.diagonal().iter() {
        dmin = dmin.min(d.abs());
        dmax = dmax.max(d.abs());
    }
    let estimate = if dmin > 0.0 { dmax / dmin } else { f64::INFINITY };
    if !(estimate <= tol.cond_cap) {
        return Err(Error::IllConditioned { estimate });
    }
    let mut x = lu.solve(&b).ok_or(Error::IllConditioned { estimate })?;
    let r = &b - &kron * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }

    let sol = symmetrize(&Matrix::from_column_slice(n, n, x.as_slice()));
    let resid = lyapunov_residual(&l, &sol, rhs);
    // Backward-error scale: roundoff in the residual grows with ||C|| and
    // with ||L|| ||X||.
    let scale = rhs.norm() + 2.0 * l.norm() * sol.norm();
    if !(resid <= tol.residual_bound(scale)) {
        return Err(Error::IllConditioned { estimate });
    }
    Ok(sol)
}

/// `||L X + X L^T + C||_F`.
fn lyapunov_residual(l: &Matrix, x: &Matrix, c: &Matrix) -> f64 {
    (l * x + x * l.transpose() + c).norm()
}

/// Residual of a candidate solution for the equation selected by `side`.
pub fn residual(a_cl: &Matrix, x: &Matrix, rhs: &Matrix, side: LyapunovSide) -> f64 {
    match side {
        LyapunovSide::TransposeLeft => lyapunov_residual(&a_cl.transpose(), x, rhs),
        LyapunovSide::PlainLeft => lyapunov_residual(a_cl, x, rhs),
    }
}
