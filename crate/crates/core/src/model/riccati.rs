//! Continuous-time algebraic Riccati equation by Kleinman's Newton iteration.

use alloc::vec::Vec;

use super::lyapunov::{solve_hurwitz, LyapunovSide};
use super::PlantModel;
use crate::error::{Error, Result};
use crate::linalg::{eigmin, spectral_abscissa, symmetrize};
use crate::{Matrix, Tolerances};

/// Cost `Tr(P_k)` and ARE residual of every Kleinman iterate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KleinmanHistory {
    pub costs: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Optimal LQR solution of a plant.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalTriple {
    /// `K* = R^{-1} B^T P*`.
    pub k_star: Matrix,
    pub p_star: Matrix,
    /// Closed-loop Gramian at `K*`.
    pub y_star: Matrix,
    pub history: KleinmanHistory,
}

/// `||A^T P + P A + Q - P B R^{-1} B^T P||_F`.
pub fn are_residual(a: &Matrix, b: &Matrix, q: &Matrix, r_inv: &Matrix, p: &Matrix) -> f64 {
    (a.transpose() * p + p * a + q - p * b * r_inv * b.transpose() * p).norm()
}

fn is_stabilizing(a: &Matrix, b: &Matrix, k: &Matrix, tol: &Tolerances) -> bool {
    matches!(spectral_abscissa(&(a - b * k)), Ok(s) if s < -tol.margin)
}

/// Pole-placement-free stabilizing gain for `(A, B)`.
///
/// Tries, in order: `K = 0` when `A` is already Hurwitz; Bass's gain
/// `c B^T Z^{-1}` with `(A + bI) Z + Z (A + bI)^T = 2 B B^T`; and finally
/// `c B^T S` with `(A - bI)^T S + S (A - bI) + I = 0`. The scale `c` doubles
/// on every rejection.
pub fn initial_stabilizing_gain(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    let n = a.nrows();
    let m = b.ncols();
    let abscissa = spectral_abscissa(a)?;
    if abscissa < -tol.margin {
        return Ok(Matrix::zeros(m, n));
    }
    let eye = Matrix::identity(n, n);
    const MAX_DOUBLINGS: usize = 20;

    let neg_abscissa = spectral_abscissa(&(-a))?;
    let shift = neg_abscissa.max(0.0) + 1.0;
    let f = -(a + &eye * shift);
    if let Ok(z) = solve_hurwitz(&f, &(b * b.transpose() * 2.0), LyapunovSide::PlainLeft, tol) {
        let scale = z.norm().max(f64::MIN_POSITIVE);
        if eigmin(&z) > 1e-12 * scale {
            if let Some(chol) = z.clone().cholesky() {
                let base = b.transpose() * chol.inverse();
                let mut c = 1.0;
                for _ in 0..MAX_DOUBLINGS {
                    let k = &base * c;
                    if is_stabilizing(a, b, &k, tol) {
                        return Ok(k);
                    }
                    c *= 2.0;
                }
            }
        }
    }

    let shifted = a - &eye * (abscissa + 1.0);
    if let Ok(s) = solve_hurwitz(&shifted, &eye, LyapunovSide::TransposeLeft, tol) {
        let base = b.transpose() * s;
        let mut c = 1.0;
        for _ in 0..MAX_DOUBLINGS {
            let k = &base * c;
            if is_stabilizing(a, b, &k, tol) {
                return Ok(k);
            }
            c *= 2.0;
        }
    }
    Err(Error::NoStabilizingInit)
}

/// Solves the ARE of `plant` from scratch and returns the optimal triple.
pub fn solve_are(plant: &PlantModel) -> Result<OptimalTriple> {
    kleinman(plant.a(), plant.b(), plant.q(), plant.r(), plant.r_inv(), plant.tolerances())
}

pub(crate) fn kleinman(
    a: &Matrix,
    b: &Matrix,
    q: &Matrix,
    r: &Matrix,
    r_inv: &Matrix,
    tol: &Tolerances,
) -> Result<OptimalTriple> {
    let mut k = initial_stabilizing_gain(a, b, tol)?;
    let mut history = KleinmanHistory::default();
    let mut last_residual = f64::INFINITY;
    let mut last_step = f64::INFINITY;
    let mut polish = 0;
    const MAX_POLISH: usize = 4;
    for _ in 0..tol.kleinman_max_iters {
        let a_cl = a - b * &k;
        let rhs = symmetrize(&(q + k.transpose() * r * &k));
        let p = solve_hurwitz(&a_cl, &rhs, LyapunovSide::TransposeLeft, tol)?;
        let residual = are_residual(a, b, q, r_inv, &p);
        history.costs.push(p.trace());
        history.residuals.push(residual);
        last_residual = residual;
        let k_next = r_inv * b.transpose() * &p;
        let step = (&k_next - &k).norm();
        let scale = 1.0 + k.norm();
        k = k_next;
        // The ARE residual is quadratic in the gain error, so keep iterating
        // past the residual tolerance until the gain update stagnates.
        if residual <= tol.residual_bound(p.norm()) {
            polish += 1;
        }
        if polish > 0 && (step <= 1e-14 * scale || polish > MAX_POLISH || step >= last_step) {
            let a_star = a - b * &k;
            let abscissa = spectral_abscissa(&a_star)?;
            if abscissa >= -tol.margin {
                return Err(Error::NotStabilizing { abscissa });
            }
            let p_star = solve_hurwitz(&a_star, &symmetrize(&(q + k.transpose() * r * &k)), LyapunovSide::TransposeLeft, tol)?;
            let y_star = solve_hurwitz(&a_star, &Matrix::identity(a.nrows(), a.nrows()), LyapunovSide::PlainLeft, tol)?;
            return Ok(OptimalTriple {
                k_star: k,
                p_star,
                y_star,
                history,
            });
        }
        if polish > 0 {
            last_step = step;
        }
    }
    Err(Error::Stalled {
        iterations: tol.kleinman_max_iters,
        residual: last_residual,
    })
}
