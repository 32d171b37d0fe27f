use rand::Rng;

use crate::error::{Error, Result};
use crate::estimator::{EstimatorDiagnostics, ResidualSignal};
use crate::model::{CostBundle, PlantModel};
use crate::sampling::{rng_from_seed, unit_sphere_matrix, SampleRng};
use crate::Matrix;

/// Shape of a disturbance `W(s)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DisturbanceKind {
    Zero,
    /// `W = d D / ||D||_F`; a seeded random direction when `direction` is
    /// `None`.
    Constant { direction: Option<Matrix> },
    /// `W = d sin(omega s + phase) D / ||D||_F`.
    Sinusoidal {
        direction: Option<Matrix>,
        omega: f64,
        phase: f64,
    },
    /// Fresh draw per outer step: i.i.d. entries uniform in `[-1, 1]`,
    /// rescaled to a Frobenius norm uniform in `[0, d]`.
    BoundedNoise,
}

impl DisturbanceKind {
    pub fn name(&self) -> &'static str {
        match self {
            DisturbanceKind::Zero => "zero",
            DisturbanceKind::Constant { .. } => "constant",
            DisturbanceKind::Sinusoidal { .. } => "sinusoidal",
            DisturbanceKind::BoundedNoise => "bounded_noise",
        }
    }
}

/// Declarative description of a disturbance with amplitude `d` (a hard
/// bound on `||W(s)||_F`) and an RNG seed.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceSpec {
    pub kind: DisturbanceKind,
    pub amplitude: f64,
    pub seed: u64,
}

impl DisturbanceSpec {
    pub fn zero() -> Self {
        Self {
            kind: DisturbanceKind::Zero,
            amplitude: 0.0,
            seed: 0,
        }
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self {
            amplitude,
            ..self.clone()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

#[derive(Debug, Clone)]
enum Source {
    Zero,
    Constant(Matrix),
    Sinusoidal { direction: Matrix, omega: f64, phase: f64 },
    Noise { rng: SampleRng, rows: usize, cols: usize },
    Estimator(ResidualSignal),
}

/// Runtime disturbance queried once per outer integration step.
#[derive(Debug, Clone)]
pub struct DisturbanceSignal {
    source: Source,
    amplitude: f64,
    realized_sup: f64,
}

fn unit_direction(direction: &Option<Matrix>, m: usize, n: usize, rng: &mut SampleRng) -> Result<Matrix> {
    match direction {
        Some(d) => {
            if d.shape() != (m, n) {
                return Err(Error::DimensionMismatch {
                    what: "disturbance direction",
                    expected: (m, n),
                    found: d.shape(),
                });
            }
            let norm = d.norm();
            if !(norm > 0.0) {
                return Err(Error::InvalidConfig("disturbance direction must be nonzero"));
            }
            Ok(d / norm)
        }
        None => Ok(unit_sphere_matrix(m, n, rng)),
    }
}

impl DisturbanceSignal {
    pub fn zero() -> Self {
        Self {
            source: Source::Zero,
            amplitude: 0.0,
            realized_sup: 0.0,
        }
    }

    /// Builds a signal emitting `m x n` matrices.
    pub fn from_spec(spec: &DisturbanceSpec, m: usize, n: usize) -> Result<Self> {
        if !(spec.amplitude >= 0.0) || !spec.amplitude.is_finite() {
            return Err(Error::InvalidConfig("disturbance amplitude must be finite and nonnegative"));
        }
        let mut rng = rng_from_seed(spec.seed);
        let source = match &spec.kind {
            DisturbanceKind::Zero => Source::Zero,
            DisturbanceKind::Constant { direction } => Source::Constant(unit_direction(direction, m, n, &mut rng)? * spec.amplitude),
            DisturbanceKind::Sinusoidal { direction, omega, phase } => Source::Sinusoidal {
                direction: unit_direction(direction, m, n, &mut rng)?,
                omega: *omega,
                phase: *phase,
            },
            DisturbanceKind::BoundedNoise => Source::Noise { rng, rows: m, cols: n },
        };
        Ok(Self {
            source,
            amplitude: spec.amplitude,
            realized_sup: 0.0,
        })
    }

    pub(crate) fn from_estimator(signal: ResidualSignal) -> Self {
        Self {
            source: Source::Estimator(signal),
            amplitude: f64::INFINITY,
            realized_sup: 0.0,
        }
    }

    /// Bound `d` on `||W||_F` (infinite for estimator residuals).
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Largest `||W||_F` emitted so far.
    pub fn realized_sup(&self) -> f64 {
        self.realized_sup
    }

    pub fn kind_name(&self) -> &'static str {
        match self.source {
            Source::Zero => "zero",
            Source::Constant(_) => "constant",
            Source::Sinusoidal { .. } => "sinusoidal",
            Source::Noise { .. } => "bounded_noise",
            Source::Estimator(_) => "estimator_residual",
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.source, Source::Zero)
    }

    pub fn estimator_diagnostics(&self) -> Option<EstimatorDiagnostics> {
        match &self.source {
            Source::Estimator(sig) => Some(sig.diagnostics()),
            _ => None,
        }
    }

    /// `W(s)` for the flow currently at `bundle.k`.
    pub fn sample(&mut self, plant: &PlantModel, s: f64, bundle: &CostBundle) -> Result<Matrix> {
        let (m, n) = (plant.m(), plant.n());
        let mut w = match &mut self.source {
            Source::Zero => Matrix::zeros(m, n),
            Source::Constant(w) => w.clone(),
            Source::Sinusoidal { direction, omega, phase } => &*direction * (self.amplitude * libm::sin(*omega * s + *phase)),
            Source::Noise { rng, rows, cols } => {
                let raw = Matrix::from_fn(*rows, *cols, |_, _| rng.random_range(-1.0..=1.0));
                let target = self.amplitude * rng.random::<f64>();
                let norm = raw.norm();
                if norm > 0.0 {
                    raw * (target / norm)
                } else {
                    raw
                }
            }
            Source::Estimator(sig) => sig.sample(plant, bundle)?,
        };
        let norm = w.norm();
        if norm > self.amplitude {
            w *= self.amplitude / norm;
        }
        self.realized_sup = self.realized_sup.max(w.norm());
        Ok(w)
    }
}
