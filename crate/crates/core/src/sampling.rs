//! Seeded random plants and stabilizing gains.
//!
//! Every random draw in the crate goes through a [`ChaCha8Rng`]; batch
//! runners derive one stream per sample from a master seed with
//! [`stream_rng`], so results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::symmetrize;
use crate::model::{CostBundle, GainMatrix, PlantModel};
use crate::Matrix;

pub type SampleRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded by `master`.
pub fn stream_rng(master: u64, stream: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

/// Seed for item `index` of a batch driven by `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    stream_rng(master, index).random()
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Uniform draw from the unit Frobenius sphere of `rows x cols` matrices.
pub fn unit_sphere_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    loop {
        let g = gaussian_matrix(rows, cols, rng);
        let norm = g.norm();
        if norm > 1e-12 {
            return g / norm;
        }
    }
}

/// Draws with `Tr(P*) > MAX_COST_RATIO * Tr(Q)` are nearly uncontrollable
/// and are redrawn.
pub const MAX_COST_RATIO: f64 = 100.0;

/// Random plant with `A` scaled by `1/sqrt(n)`, Gaussian `B`, and
/// `Q = G G^T / n + I/2`, `R = H H^T / m + I/2`.
///
/// Draws that fail to build, or whose optimal cost exceeds
/// [`MAX_COST_RATIO`] times `Tr(Q)`, are redrawn from the same stream.
pub fn random_plant(n: usize, m: usize, seed: u64) -> Result<PlantModel> {
    let mut rng = rng_from_seed(seed);
    let mut last_err = None;
    for _ in 0..64 {
        let a = gaussian_matrix(n, n, &mut rng) / libm::sqrt(n as f64);
        let b = gaussian_matrix(n, m, &mut rng);
        let g = gaussian_matrix(n, n, &mut rng);
        let h = gaussian_matrix(m, m, &mut rng);
        let q = symmetrize(&(&g * g.transpose() / n as f64 + Matrix::identity(n, n) * 0.5));
        let r = symmetrize(&(&h * h.transpose() / m as f64 + Matrix::identity(m, m) * 0.5));
        match PlantModel::new(a, b, q, r) {
            Ok(p) if p.optimal_cost() <= MAX_COST_RATIO * p.q().trace() => return Ok(p),
            Ok(p) => {
                last_err = Some(crate::error::Error::IllConditioned {
                    estimate: p.optimal_cost() / p.q().trace(),
                })
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// Random Hurwitz matrix: Gaussian entries shifted left past the spectral
/// abscissa by a margin drawn from `[0.1, 1.1)`.
pub fn random_hurwitz<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    let g = gaussian_matrix(n, n, rng) / libm::sqrt(n as f64);
    let abscissa = crate::linalg::spectral_abscissa(&g).unwrap_or(0.0);
    let margin = 0.1 + rng.random::<f64>();
    g - Matrix::identity(n, n) * (abscissa + margin)
}

/// Draws `K = K* + E` with Gaussian direction and `||E||_F` uniform in
/// `[0, radius]`, redrawing until the gain is stabilizing and evaluable.
pub fn sample_stabilizing_gain<R: Rng + ?Sized>(
    plant: &PlantModel,
    radius: f64,
    rng: &mut R,
    max_tries: usize,
) -> Option<(GainMatrix, CostBundle)> {
    for _ in 0..max_tries {
        let dir = unit_sphere_matrix(plant.m(), plant.n(), rng);
        let scale = radius * rng.random::<f64>();
        let k = &plant.optimal().k_star + dir * scale;
        let Ok(gain) = plant.gain(k) else { continue };
        if !gain.is_stabilizing() {
            continue;
        }
        if let Ok(bundle) = plant.evaluate(&gain) {
            return Some((gain, bundle));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_plant_is_deterministic() {
        let p1 = random_plant(3, 2, 11).unwrap();
        let p2 = random_plant(3, 2, 11).unwrap();
        assert_eq!(p1.a(), p2.a());
        assert_eq!(p1.optimal().p_star, p2.optimal().p_star);
    }

    #[test]
    fn streams_differ() {
        let mut a = stream_rng(5, 0);
        let mut b = stream_rng(5, 1);
        assert_ne!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn sphere_draw_has_unit_norm() {
        let mut rng = rng_from_seed(1);
        let u = unit_sphere_matrix(2, 3, &mut rng);
        assert!((u.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sampled_gain_is_stabilizing_and_within_radius() {
        let plant = random_plant(3, 1, 2).unwrap();
        let mut rng = rng_from_seed(3);
        for _ in 0..20 {
            let (g, _) = sample_stabilizing_gain(&plant, 1.0, &mut rng, 1000).unwrap();
            assert!(g.is_stabilizing());
            assert!((g.k() - &plant.optimal().k_star).norm() <= 1.0 + 1e-12);
        }
    }
}
