//! Zeroth-order gradient estimates from exact cost evaluations, and the
//! residual disturbance `W = eta (grad J - estimate)` they induce on a flow.

use crate::error::{Error, Result};
use crate::flows::DisturbanceSignal;
use crate::model::{CostBundle, GainMatrix, PlantModel};
use crate::sampling::{rng_from_seed, unit_sphere_matrix, SampleRng};
use crate::Matrix;

/// Redraws allowed per sphere sample before giving up.
pub const MAX_PROBE_RETRIES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorScheme {
    /// Averaged two-point differences along directions uniform on the unit
    /// Frobenius sphere.
    TwoPointSphere,
    /// Central differences along each entry.
    CoordinateFD,
}

impl EstimatorScheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorScheme::TwoPointSphere => "two_point_sphere",
            EstimatorScheme::CoordinateFD => "coordinate_fd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Probe radius `r > 0` in Frobenius norm.
    pub radius: f64,
    /// Sphere samples per estimate; ignored by `CoordinateFD`.
    pub num_samples: usize,
    pub seed: u64,
    pub scheme: EstimatorScheme,
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::InvalidConfig("estimator radius must be positive"));
        }
        if self.num_samples == 0 {
            return Err(Error::InvalidConfig("estimator needs at least one sample"));
        }
        Ok(())
    }
}

/// Stateful estimator; its RNG advances across calls so a fixed seed
/// reproduces the whole sequence of estimates.
#[derive(Debug, Clone)]
pub struct GradientEstimator {
    cfg: EstimatorConfig,
    rng: SampleRng,
    rejections: u64,
    estimates: u64,
}

fn probe_cost(plant: &PlantModel, k: Matrix) -> Option<f64> {
    let gain = plant.gain(k).ok()?;
    plant.cost(&gain).ok()
}

impl GradientEstimator {
    pub fn new(cfg: EstimatorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            rng: rng_from_seed(cfg.seed),
            cfg,
            rejections: 0,
            estimates: 0,
        })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.cfg
    }

    /// Probe draws discarded because `K +- rU` was not stabilizing.
    pub fn rejections(&self) -> u64 {
        self.rejections
    }

    pub fn estimates(&self) -> u64 {
        self.estimates
    }

    pub fn estimate(&mut self, plant: &PlantModel, gain: &GainMatrix) -> Result<Matrix> {
        if !gain.is_stabilizing() {
            return Err(Error::NotStabilizing {
                abscissa: gain.spectral_abscissa(),
            });
        }
        let (m, n) = (plant.m(), plant.n());
        if gain.k().shape() != (m, n) {
            return Err(Error::DimensionMismatch {
                what: "gain",
                expected: (m, n),
                found: gain.k().shape(),
            });
        }
        let r = self.cfg.radius;
        let k = gain.k();
        let out = match self.cfg.scheme {
            EstimatorScheme::CoordinateFD => {
                let mut g = Matrix::zeros(m, n);
                for j in 0..n {
                    for i in 0..m {
                        let mut plus = k.clone();
                        plus[(i, j)] += r;
                        let mut minus = k.clone();
                        minus[(i, j)] -= r;
                        match (probe_cost(plant, plus), probe_cost(plant, minus)) {
                            (Some(jp), Some(jm)) => g[(i, j)] = (jp - jm) / (2.0 * r),
                            _ => {
                                self.rejections += 1;
                                return Err(Error::ProbeRejected { attempts: 1 });
                            }
                        }
                    }
                }
                g
            }
            EstimatorScheme::TwoPointSphere => {
                let mut acc = Matrix::zeros(m, n);
                for _ in 0..self.cfg.num_samples {
                    let mut accepted = false;
                    for _ in 0..MAX_PROBE_RETRIES {
                        let u = unit_sphere_matrix(m, n, &mut self.rng);
                        let plus = probe_cost(plant, k + &u * r);
                        let minus = probe_cost(plant, k - &u * r);
                        if let (Some(jp), Some(jm)) = (plus, minus) {
                            acc += u * (jp - jm);
                            accepted = true;
                            break;
                        }
                        self.rejections += 1;
                    }
                    if !accepted {
                        return Err(Error::ProbeRejected {
                            attempts: MAX_PROBE_RETRIES,
                        });
                    }
                }
                acc * ((m * n) as f64 / (2.0 * r * self.cfg.num_samples as f64))
            }
        };
        self.estimates += 1;
        Ok(out)
    }
}

/// One-shot estimate with a fresh estimator seeded from `cfg`.
pub fn estimate_gradient(plant: &PlantModel, gain: &GainMatrix, cfg: &EstimatorConfig) -> Result<Matrix> {
    GradientEstimator::new(*cfg)?.estimate(plant, gain)
}

/// Counters reported alongside a trajectory driven by estimator residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorDiagnostics {
    pub realized_sup: f64,
    pub rejections: u64,
    pub estimates: u64,
}

/// Source behind [`DisturbanceSignal`]s built by [`residual_signal`].
#[derive(Debug, Clone)]
pub struct ResidualSignal {
    estimator: GradientEstimator,
    eta: f64,
    realized_sup: f64,
}

impl ResidualSignal {
    pub(crate) fn sample(&mut self, plant: &PlantModel, bundle: &CostBundle) -> Result<Matrix> {
        let gain = plant.gain(bundle.k.clone())?;
        let est = self.estimator.estimate(plant, &gain)?;
        let w = (&bundle.grad - est) * self.eta;
        self.realized_sup = self.realized_sup.max(w.norm());
        Ok(w)
    }

    pub(crate) fn diagnostics(&self) -> EstimatorDiagnostics {
        EstimatorDiagnostics {
            realized_sup: self.realized_sup,
            rejections: self.estimator.rejections,
            estimates: self.estimator.estimates,
        }
    }
}

/// Disturbance `W = eta (grad J(K) - estimate(K))` evaluated at the flow's
/// current gain on every query.
pub fn residual_signal(cfg: &EstimatorConfig, eta: f64) -> Result<DisturbanceSignal> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidConfig("eta must be positive"));
    }
    Ok(DisturbanceSignal::from_estimator(ResidualSignal {
        estimator: GradientEstimator::new(*cfg)?,
        eta,
        realized_sup: 0.0,
    }))
}
