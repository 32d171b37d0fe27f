use alloc::vec::Vec;

use crate::bounds::PlCertificate;
use crate::error::{Error, Result};
use crate::model::PlantModel;
use crate::Matrix;

/// One grid point of the scalar saturation table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationRow {
    pub z: f64,
    /// `|J'(z)|`.
    pub grad_abs: f64,
    /// `J(z) - J(z*)`.
    pub gap: f64,
    /// `xi1(J(z) - J(z*))`.
    pub xi1: f64,
}

impl SaturationRow {
    pub fn holds(&self) -> bool {
        self.grad_abs >= self.xi1 - 1e-12
    }
}

/// Gradient magnitude against the gradient-dominance bound on the scalar
/// plant `A = B = Q = R = 1`, where `|J'(z)|` tends to `1/2` and `xi1`
/// saturates at the same value.
pub fn saturation_demo(z_grid: &[f64]) -> Result<Vec<SaturationRow>> {
    let plant = PlantModel::one_dim();
    let cert = PlCertificate::new(&plant);
    z_grid
        .iter()
        .map(|&z| {
            if !(z > 1.0) || !z.is_finite() {
                return Err(Error::OutOfDomain(z));
            }
            let gain = plant.gain(Matrix::from_element(1, 1, z))?;
            let bundle = plant.evaluate(&gain)?;
            let gap = bundle.suboptimality(&plant);
            Ok(SaturationRow {
                z,
                grad_abs: bundle.grad[(0, 0)].abs(),
                gap,
                xi1: cert.xi1(gap)?,
            })
        })
        .collect()
}
