/// Numerical tolerances shared by every solver and check in the crate.
///
/// A residual `r` of a computed matrix `X` passes when
/// `r <= tol_abs + tol_rel * ||X||_F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub tol_abs: f64,
    pub tol_rel: f64,
    /// A gain is stabilizing when the closed-loop spectral abscissa is
    /// below `-margin`.
    pub margin: f64,
    /// Upper bound on the pivot-ratio condition estimate of the Kronecker
    /// system behind a Lyapunov solve.
    pub cond_cap: f64,
    /// Largest state dimension handled by the dense Kronecker solver.
    pub max_dim: usize,
    /// Iteration budget of the Kleinman Riccati solver.
    pub kleinman_max_iters: usize,
}

impl Tolerances {
    pub const fn new() -> Self {
        Self {
            tol_abs: 1e-12,
            tol_rel: 1e-10,
            margin: 1e-9,
            cond_cap: 1e14,
            max_dim: 32,
            kleinman_max_iters: 100,
        }
    }

    /// `tol_abs + tol_rel * scale`.
    pub fn residual_bound(&self, scale: f64) -> f64 {
        self.tol_abs + self.tol_rel * scale
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::new()
    }
}
