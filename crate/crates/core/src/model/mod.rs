//! LQR problem data and the exact quantities every other module builds on:
//! the cost matrix `P_K`, the closed-loop Gramian `Y_K`, the cost
//! `J(K) = Tr(P_K)`, its gradient and the natural / Newton directions.

mod inner;
mod lyapunov;
mod riccati;

pub use inner::{weighted_inner, WeightedInner};
pub use lyapunov::{residual as lyapunov_residual, solve_lyapunov, LyapunovSide};
pub use riccati::{are_residual, initial_stabilizing_gain, solve_are, KleinmanHistory, OptimalTriple};

use lyapunov::solve_hurwitz;

use crate::error::{Error, Result};
use crate::linalg::{check_shape, eigmin, is_symmetric, spectral_abscissa, symmetrize};
use crate::{Matrix, Tolerances};

/// LQR plant `(A, B, Q, R)` together with its optimal solution.
///
/// The optimal triple is computed once at construction; a plant that cannot
/// be built has no stabilizing gain or a Riccati solve that failed.
#[derive(Debug, Clone)]
pub struct PlantModel {
    a: Matrix,
    b: Matrix,
    q: Matrix,
    r: Matrix,
    r_inv: Matrix,
    tol: Tolerances,
    optimal: OptimalTriple,
}

impl PlantModel {
    pub fn new(a: Matrix, b: Matrix, q: Matrix, r: Matrix) -> Result<Self> {
        Self::with_tolerances(a, b, q, r, Tolerances::default())
    }

    pub fn with_tolerances(a: Matrix, b: Matrix, q: Matrix, r: Matrix, tol: Tolerances) -> Result<Self> {
        let n = a.nrows();
        check_shape("A", &a, n, n)?;
        let m = b.ncols();
        check_shape("B", &b, n, m)?;
        check_shape("Q", &q, n, n)?;
        check_shape("R", &r, m, m)?;
        if n > tol.max_dim {
            return Err(Error::TooLarge { n, max: tol.max_dim });
        }
        if !is_symmetric(&q, 1e-12) {
            return Err(Error::NotSymmetric("Q"));
        }
        if !is_symmetric(&r, 1e-12) {
            return Err(Error::NotSymmetric("R"));
        }
        let q = symmetrize(&q);
        let r = symmetrize(&r);
        if !(eigmin(&q) > 0.0) {
            return Err(Error::NotPositiveDefinite("Q"));
        }
        if !(eigmin(&r) > 0.0) {
            return Err(Error::NotPositiveDefinite("R"));
        }
        let r_inv = symmetrize(
            &r.clone()
                .cholesky()
                .ok_or(Error::NotPositiveDefinite("R"))?
                .inverse(),
        );
        let optimal = riccati::kleinman(&a, &b, &q, &r, &r_inv, &tol)?;
        Ok(Self {
            a,
            b,
            q,
            r,
            r_inv,
            tol,
            optimal,
        })
    }

    /// The scalar plant `A = B = Q = R = 1`.
    pub fn one_dim() -> Self {
        let one = Matrix::from_element(1, 1, 1.0);
        Self::new(one.clone(), one.clone(), one.clone(), one).expect("scalar plant is stabilizable")
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn r(&self) -> &Matrix {
        &self.r
    }

    pub fn r_inv(&self) -> &Matrix {
        &self.r_inv
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Input dimension.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn optimal(&self) -> &OptimalTriple {
        &self.optimal
    }

    /// `J(K*) = Tr(P*)`.
    pub fn optimal_cost(&self) -> f64 {
        self.optimal.p_star.trace()
    }

    pub fn closed_loop(&self, k: &Matrix) -> Matrix {
        &self.a - &self.b * k
    }

    /// Wraps `k` with its closed-loop spectral abscissa.
    pub fn gain(&self, k: Matrix) -> Result<GainMatrix> {
        check_shape("gain", &k, self.m(), self.n())?;
        let spectral_abscissa = spectral_abscissa(&self.closed_loop(&k))?;
        Ok(GainMatrix {
            stabilizing: spectral_abscissa < -self.tol.margin,
            k,
            spectral_abscissa,
        })
    }

    pub fn optimal_gain(&self) -> GainMatrix {
        self.gain(self.optimal.k_star.clone())
            .expect("optimal gain has valid shape")
    }

    fn require_stabilizing(&self, gain: &GainMatrix) -> Result<()> {
        check_shape("gain", &gain.k, self.m(), self.n())?;
        if !gain.stabilizing {
            return Err(Error::NotStabilizing {
                abscissa: gain.spectral_abscissa,
            });
        }
        Ok(())
    }

    pub(crate) fn cost_matrix(&self, k: &Matrix) -> Result<Matrix> {
        let rhs = symmetrize(&(&self.q + k.transpose() * &self.r * k));
        solve_hurwitz(&self.closed_loop(k), &rhs, LyapunovSide::TransposeLeft, &self.tol)
    }

    pub(crate) fn gramian(&self, k: &Matrix) -> Result<Matrix> {
        let n = self.n();
        solve_hurwitz(&self.closed_loop(k), &Matrix::identity(n, n), LyapunovSide::PlainLeft, &self.tol)
    }

    /// `J(K) = Tr(P_K)` without forming the rest of the bundle.
    pub fn cost(&self, gain: &GainMatrix) -> Result<f64> {
        self.require_stabilizing(gain)?;
        Ok(self.cost_matrix(&gain.k)?.trace())
    }

    /// Cost, gradient and search directions at a stabilizing gain.
    pub fn evaluate(&self, gain: &GainMatrix) -> Result<CostBundle> {
        self.require_stabilizing(gain)?;
        let k = &gain.k;
        let p = self.cost_matrix(k)?;
        let y = self.gramian(k)?;
        let k_prime = &self.r_inv * self.b.transpose() * &p;
        let residual_gain = &self.r * k - self.b.transpose() * &p;
        let nat_grad = &residual_gain * 2.0;
        let grad = &nat_grad * &y;
        let diff = k - &k_prime;
        let m_k = symmetrize(&(diff.transpose() * &self.r * &diff));
        Ok(CostBundle {
            k: k.clone(),
            cost: p.trace(),
            p,
            y,
            grad,
            nat_grad,
            newton_dir: -diff,
            k_prime,
            m_k,
        })
    }

    /// Second-order model of `J(K + E)` around `K`.
    ///
    /// The first-order Gramian correction `dY` solves
    /// `(A - BK) dY + dY (A - BK)^T - B E Y_K - Y_K E^T B^T = 0`.
    pub fn taylor_second_order(&self, gain: &GainMatrix, e: &Matrix) -> Result<f64> {
        check_shape("perturbation", e, self.m(), self.n())?;
        let bundle = self.evaluate(gain)?;
        let perturbed = self.gain(&gain.k + e)?;
        self.require_stabilizing(&perturbed)?;
        let bey = &self.b * e * &bundle.y;
        let rhs = -symmetrize(&(&bey + bey.transpose()));
        let dy = solve_hurwitz(&self.closed_loop(&gain.k), &rhs, LyapunovSide::PlainLeft, &self.tol)?;
        let g = &bundle.nat_grad * 0.5;
        let first = 2.0 * e.dot(&(&g * &bundle.y));
        let second = e.dot(&(&self.r * e * &bundle.y)) + 2.0 * e.dot(&(&g * &dy));
        Ok(bundle.cost + first + second)
    }
}

/// Candidate feedback `u = -K x` with its closed-loop stability data.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    k: Matrix,
    spectral_abscissa: f64,
    stabilizing: bool,
}

impl GainMatrix {
    pub fn k(&self) -> &Matrix {
        &self.k
    }

    pub fn into_inner(self) -> Matrix {
        self.k
    }

    /// Largest real part of `eig(A - BK)`.
    pub fn spectral_abscissa(&self) -> f64 {
        self.spectral_abscissa
    }

    pub fn is_stabilizing(&self) -> bool {
        self.stabilizing
    }
}

/// Exact quantities at a stabilizing gain `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostBundle {
    pub k: Matrix,
    pub p: Matrix,
    pub y: Matrix,
    /// `Tr(P_K)`.
    pub cost: f64,
    /// `2 (R K - B^T P_K) Y_K`.
    pub grad: Matrix,
    /// `2 (R K - B^T P_K)`.
    pub nat_grad: Matrix,
    /// `-(K - R^{-1} B^T P_K)`.
    pub newton_dir: Matrix,
    /// `R^{-1} B^T P_K`.
    pub k_prime: Matrix,
    /// `(K - K')^T R (K - K')`, an `n x n` matrix.
    pub m_k: Matrix,
}

impl CostBundle {
    /// `J(K) - J(K*)` evaluated as `<K - K*, R (K - K*)>_{Y_K}`.
    ///
    /// This equals `Tr(P_K - P*)` but does not cancel catastrophically near
    /// the optimum.
    pub fn suboptimality(&self, plant: &PlantModel) -> f64 {
        let delta = &self.k - &plant.optimal.k_star;
        delta.dot(&(plant.r() * &delta * &self.y)).max(0.0)
    }

    /// `P_K >= P*`, `Y_K > 0` and `J(K) >= J(K*)`, each up to `tol`.
    pub fn invariants_hold(&self, plant: &PlantModel, tol: f64) -> bool {
        let scale = 1.0 + self.p.norm();
        eigmin(&(&self.p - &plant.optimal.p_star)) >= -tol * scale
            && eigmin(&self.y) > 0.0
            && self.cost >= plant.optimal_cost() - tol * scale
    }
}
