#![allow(dead_code)]

use lqr_iss_core::Matrix;

/// `exp(M)` by scaling and squaring a degree-20 Taylor polynomial.
pub fn expm(m: &Matrix) -> Matrix {
    let n = m.nrows();
    let norm = m.norm();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = m * scale;
    let mut term = Matrix::identity(n, n);
    let mut sum = Matrix::identity(n, n);
    for k in 1..=20 {
        term = &term * &x / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `int_0^inf exp(L^T t) C exp(L t) dt` for Hurwitz `L`: Simpson on a short
/// interval, then `X(2T) = X(T) + E(T)^T X(T) E(T)` with `E(T) = exp(L T)`.
pub fn lyapunov_by_quadrature(l: &Matrix, c: &Matrix) -> Matrix {
    let t0 = 1.0 / 64.0;
    let intervals = 64;
    let h = t0 / intervals as f64;
    let f = |t: f64| {
        let e = expm(&(l * t));
        e.transpose() * c * e
    };
    let mut x = f(0.0) + f(t0);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        x += f(i as f64 * h) * w;
    }
    x *= h / 3.0;
    let mut e = expm(&(l * t0));
    for _ in 0..18 {
        x = &x + e.transpose() * &x * &e;
        e = &e * &e;
    }
    x
}

pub fn scalar(v: f64) -> Matrix {
    Matrix::from_element(1, 1, v)
}

/// Closed forms for the scalar plant `A = B = Q = R = 1`.
pub mod one_dim {
    pub fn cost(k: f64) -> f64 {
        (1.0 + k * k) / (2.0 * (k - 1.0))
    }

    pub fn grad(k: f64) -> f64 {
        (k * k - 2.0 * k - 1.0) / (2.0 * (k - 1.0) * (k - 1.0))
    }

    pub fn k_star() -> f64 {
        1.0 + 2f64.sqrt()
    }
}
