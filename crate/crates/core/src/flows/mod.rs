//! Perturbed gradient flows `dK/ds = D(K) + W(s)` integrated with classical
//! RK4.
//!
//! `W` is held constant over each outer step. A step whose stages leave the
//! set of stabilizing gains is retried as two half steps, recursively, up to
//! [`FlowConfig::max_halvings`] times.

mod disturbance;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use disturbance::{DisturbanceKind, DisturbanceSignal, DisturbanceSpec};

use crate::error::{Error, Result};
use crate::model::{CostBundle, GainMatrix, PlantModel};
use crate::Matrix;

/// Which search direction drives the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlowKind {
    /// `-eta grad J(K)`.
    Standard,
    /// `-eta 2 (R K - B^T P_K)`.
    Natural,
    /// `-eta (K - R^{-1} B^T P_K)`.
    Newton,
}

impl FlowKind {
    pub const ALL: [FlowKind; 3] = [FlowKind::Standard, FlowKind::Natural, FlowKind::Newton];

    pub fn as_str(&self) -> &'static str {
        match self {
            FlowKind::Standard => "standard",
            FlowKind::Natural => "natural",
            FlowKind::Newton => "newton",
        }
    }

    /// Unperturbed drift at a fully evaluated gain.
    pub fn drift(&self, bundle: &CostBundle, eta: f64) -> Matrix {
        match self {
            FlowKind::Standard => &bundle.grad * -eta,
            FlowKind::Natural => &bundle.nat_grad * -eta,
            FlowKind::Newton => &bundle.newton_dir * eta,
        }
    }
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FlowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(FlowKind::Standard),
            "natural" => Ok(FlowKind::Natural),
            "newton" => Ok(FlowKind::Newton),
            _ => Err(Error::InvalidConfig("flow kind must be standard, natural or newton")),
        }
    }
}

/// Integration parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub kind: FlowKind,
    /// Step-size scale `eta > 0` of the drift.
    pub eta: f64,
    /// Outer RK4 step in flow time.
    pub h: f64,
    /// Final flow time.
    pub s_max: f64,
    /// Keep every `record_every`-th step (the first and last are always kept).
    pub record_every: usize,
    pub max_halvings: u32,
    /// Stop early once `J(K) - J(K*)` falls below this; zero disables the
    /// check.
    pub converge_tol: f64,
}

impl FlowConfig {
    pub fn new(kind: FlowKind, eta: f64) -> Self {
        Self {
            kind,
            eta,
            h: 0.01,
            s_max: 50.0,
            record_every: 10,
            max_halvings: 10,
            converge_tol: 1e-12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::InvalidConfig("eta must be positive"));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidConfig("step h must be positive"));
        }
        if !(self.s_max >= 0.0) || !self.s_max.is_finite() {
            return Err(Error::InvalidConfig("s_max must be finite and nonnegative"));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig("record_every must be at least 1"));
        }
        if !(self.converge_tol >= 0.0) {
            return Err(Error::InvalidConfig("converge_tol must be nonnegative"));
        }
        Ok(())
    }
}

fn drift_at(plant: &PlantModel, k: Matrix, kind: FlowKind, eta: f64, w: &Matrix) -> Result<Matrix> {
    let gain = plant.gain(k)?;
    if !gain.is_stabilizing() {
        return Err(Error::NotStabilizing {
            abscissa: gain.spectral_abscissa(),
        });
    }
    let k = gain.k();
    let d = match kind {
        FlowKind::Standard => plant.evaluate(&gain)?.grad * -eta,
        FlowKind::Natural | FlowKind::Newton => {
            let p = plant.cost_matrix(k)?;
            let bp = plant.b().transpose() * p;
            if kind == FlowKind::Natural {
                (plant.r() * k - bp) * (-2.0 * eta)
            } else {
                (plant.r_inv() * bp - k) * eta
            }
        }
    };
    Ok(d + w)
}

fn rk4(plant: &PlantModel, k: &Matrix, kind: FlowKind, eta: f64, w: &Matrix, h: f64) -> Result<GainMatrix> {
    let k1 = drift_at(plant, k.clone(), kind, eta, w)?;
    let k2 = drift_at(plant, k + &k1 * (h / 2.0), kind, eta, w)?;
    let k3 = drift_at(plant, k + &k2 * (h / 2.0), kind, eta, w)?;
    let k4 = drift_at(plant, k + &k3 * h, kind, eta, w)?;
    let next = k + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    let gain = plant.gain(next)?;
    if !gain.is_stabilizing() {
        return Err(Error::NotStabilizing {
            abscissa: gain.spectral_abscissa(),
        });
    }
    Ok(gain)
}

fn step_rec(plant: &PlantModel, k: &Matrix, kind: FlowKind, eta: f64, w: &Matrix, h: f64, halvings_left: u32) -> Result<GainMatrix> {
    match rk4(plant, k, kind, eta, w, h) {
        Ok(g) => Ok(g),
        Err(e) if halvings_left == 0 => Err(e),
        Err(_) => {
            let mid = step_rec(plant, k, kind, eta, w, h / 2.0, halvings_left - 1)?;
            step_rec(plant, mid.k(), kind, eta, w, h / 2.0, halvings_left - 1)
        }
    }
}

/// One RK4 step of length `h` with the disturbance `w` held fixed.
///
/// Fails with [`Error::LeftAdmissibleSet`] if ten successive halvings cannot
/// keep every stage stabilizing.
pub fn step(plant: &PlantModel, gain: &GainMatrix, kind: FlowKind, eta: f64, w: &Matrix, h: f64) -> Result<GainMatrix> {
    step_with(plant, gain, kind, eta, w, h, 10)
}

pub fn step_with(
    plant: &PlantModel,
    gain: &GainMatrix,
    kind: FlowKind,
    eta: f64,
    w: &Matrix,
    h: f64,
    max_halvings: u32,
) -> Result<GainMatrix> {
    if w.shape() != gain.k().shape() {
        return Err(Error::DimensionMismatch {
            what: "disturbance",
            expected: gain.k().shape(),
            found: w.shape(),
        });
    }
    if !gain.is_stabilizing() {
        return Err(Error::NotStabilizing {
            abscissa: gain.spectral_abscissa(),
        });
    }
    step_rec(plant, gain.k(), kind, eta, w, h, max_halvings).map_err(|e| match e {
        Error::NotStabilizing { .. } | Error::IllConditioned { .. } => Error::LeftAdmissibleSet { s: f64::NAN },
        other => other,
    })
}

/// Candidate Lyapunov functions at one gain, with `D = K - K*`:
/// `v3 = J(K) - J(K*)`, `v4 = <D, D>_{Y*} / 2`, `v5 = v3 + v4`,
/// `v6 = v3 + <D, R D>_{Y*} / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovValues {
    pub v3: f64,
    pub v4: f64,
    pub v5: f64,
    pub v6: f64,
}

pub fn lyapunov_values(plant: &PlantModel, bundle: &CostBundle) -> LyapunovValues {
    let opt = plant.optimal();
    let delta = &bundle.k - &opt.k_star;
    let v3 = bundle.suboptimality(plant);
    let v4 = 0.5 * delta.dot(&(&delta * &opt.y_star));
    let v6 = v3 + 0.5 * delta.dot(&(plant.r() * &delta * &opt.y_star));
    LyapunovValues { v3, v4, v5: v3 + v4, v6 }
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub s: f64,
    pub k: Matrix,
    pub v3: f64,
    pub v4: f64,
    pub v5: f64,
    pub v6: f64,
    pub grad_norm: f64,
    /// Norm of the disturbance applied over the step starting here.
    pub w_norm: f64,
    pub abscissa: f64,
    pub w: Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowExit {
    Converged,
    MaxTime,
    LeftAdmissibleSet,
}

impl FlowExit {
    pub fn as_str(&self) -> &'static str {
        match self {
            FlowExit::Converged => "converged",
            FlowExit::MaxTime => "max_time",
            FlowExit::LeftAdmissibleSet => "left_admissible_set",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: FlowKind,
    pub eta: f64,
    pub samples: Vec<TrajectorySample>,
    pub exit: FlowExit,
    /// Flow time of the last accepted gain.
    pub exit_s: f64,
    pub steps: usize,
    pub diagnostic: Option<String>,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory holds the initial sample")
    }

    pub fn left_admissible_set(&self) -> bool {
        self.exit == FlowExit::LeftAdmissibleSet
    }
}

fn sample_at(s: f64, bundle: &CostBundle, values: LyapunovValues, gain: &GainMatrix, w: Matrix) -> TrajectorySample {
    TrajectorySample {
        s,
        k: bundle.k.clone(),
        v3: values.v3,
        v4: values.v4,
        v5: values.v5,
        v6: values.v6,
        grad_norm: bundle.grad.norm(),
        w_norm: w.norm(),
        abscissa: gain.spectral_abscissa(),
        w,
    }
}

/// Integrates the flow from `k0` until `s_max`, convergence, or loss of
/// stability.
///
/// Lyapunov values are recomputed from exact solves at every recorded
/// point. Leaving the admissible set is reported through
/// [`Trajectory::exit`] rather than as an error; the samples collected up to
/// that point are kept.
pub fn integrate(plant: &PlantModel, k0: &GainMatrix, cfg: &FlowConfig, signal: &mut DisturbanceSignal) -> Result<Trajectory> {
    cfg.validate()?;
    if k0.k().shape() != (plant.m(), plant.n()) {
        return Err(Error::DimensionMismatch {
            what: "initial gain",
            expected: (plant.m(), plant.n()),
            found: k0.k().shape(),
        });
    }
    if !k0.is_stabilizing() {
        return Err(Error::NotStabilizing {
            abscissa: k0.spectral_abscissa(),
        });
    }
    let mut traj = Trajectory {
        kind: cfg.kind,
        eta: cfg.eta,
        samples: Vec::new(),
        exit: FlowExit::MaxTime,
        exit_s: 0.0,
        steps: 0,
        diagnostic: None,
    };
    let zero = Matrix::zeros(plant.m(), plant.n());
    let mut gain = k0.clone();
    let mut s = 0.0;
    let mut idx = 0usize;
    loop {
        let bundle = match plant.evaluate(&gain) {
            Ok(b) => b,
            Err(e) => {
                traj.exit = FlowExit::LeftAdmissibleSet;
                traj.diagnostic = Some(format!("evaluation failed at s = {s}: {e}"));
                break;
            }
        };
        let values = lyapunov_values(plant, &bundle);
        let converged = cfg.converge_tol > 0.0 && values.v3 <= cfg.converge_tol;
        let timed_out = s >= cfg.s_max - 1e-12 * cfg.h;
        if converged || timed_out {
            traj.samples.push(sample_at(s, &bundle, values, &gain, zero.clone()));
            traj.exit = if converged { FlowExit::Converged } else { FlowExit::MaxTime };
            break;
        }
        let w = match signal.sample(plant, s, &bundle) {
            Ok(w) => w,
            Err(e) => {
                traj.samples.push(sample_at(s, &bundle, values, &gain, zero.clone()));
                traj.exit = FlowExit::LeftAdmissibleSet;
                traj.diagnostic = Some(format!("disturbance failed at s = {s}: {e}"));
                break;
            }
        };
        if idx % cfg.record_every == 0 {
            traj.samples.push(sample_at(s, &bundle, values, &gain, w.clone()));
        }
        let h = cfg.h.min(cfg.s_max - s);
        match step_with(plant, &gain, cfg.kind, cfg.eta, &w, h, cfg.max_halvings) {
            Ok(next) => gain = next,
            Err(e) => {
                if idx % cfg.record_every != 0 {
                    traj.samples.push(sample_at(s, &bundle, values, &gain, w));
                }
                traj.exit = FlowExit::LeftAdmissibleSet;
                traj.diagnostic = Some(format!("step from s = {s} failed: {e}"));
                break;
            }
        }
        idx += 1;
        s = (idx as f64 * cfg.h).min(cfg.s_max);
    }
    traj.exit_s = s;
    traj.steps = idx;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Matrix {
        Matrix::from_element(1, 1, v)
    }

    #[test]
    fn standard_drift_is_natural_drift_times_gramian() {
        let plant = PlantModel::one_dim();
        let g = plant.gain(scalar(3.0)).unwrap();
        let b = plant.evaluate(&g).unwrap();
        let std = FlowKind::Standard.drift(&b, 0.7);
        let nat = FlowKind::Natural.drift(&b, 0.7);
        assert!((std - nat * &b.y).norm() < 1e-15);
    }

    #[test]
    fn drift_helper_matches_bundle() {
        let plant = crate::sampling::random_plant(3, 2, 4).unwrap();
        let k = &plant.optimal().k_star + Matrix::from_element(2, 3, 0.05);
        let g = plant.gain(k.clone()).unwrap();
        let b = plant.evaluate(&g).unwrap();
        let w = Matrix::zeros(2, 3);
        for kind in FlowKind::ALL {
            let d = drift_at(&plant, k.clone(), kind, 0.3, &w).unwrap();
            assert!((d - kind.drift(&b, 0.3)).norm() < 1e-10);
        }
    }

    #[test]
    fn optimum_is_a_fixed_point() {
        let plant = PlantModel::one_dim();
        let g = plant.optimal_gain();
        let next = step(&plant, &g, FlowKind::Standard, 1.0, &scalar(0.0), 0.1).unwrap();
        assert!((next.k() - g.k()).norm() < 1e-12);
    }

    #[test]
    fn unperturbed_flows_converge() {
        let plant = PlantModel::one_dim();
        for kind in FlowKind::ALL {
            let mut cfg = FlowConfig::new(kind, 1.0);
            cfg.s_max = 40.0;
            let g = plant.gain(scalar(3.0)).unwrap();
            let t = integrate(&plant, &g, &cfg, &mut DisturbanceSignal::zero()).unwrap();
            assert_eq!(t.exit, FlowExit::Converged, "{kind}");
            assert!(t.last().v3 <= 1e-12);
            assert!(t.samples.iter().all(|x| x.abscissa < 0.0));
        }
    }

    #[test]
    fn large_push_toward_instability_leaves_set() {
        let plant = PlantModel::one_dim();
        let spec = DisturbanceSpec {
            kind: DisturbanceKind::Constant {
                direction: Some(scalar(-1.0)),
            },
            amplitude: 1e8,
            seed: 0,
        };
        let mut sig = DisturbanceSignal::from_spec(&spec, 1, 1).unwrap();
        let mut cfg = FlowConfig::new(FlowKind::Natural, 1.0);
        cfg.s_max = 5.0;
        let g = plant.gain(scalar(3.0)).unwrap();
        let t = integrate(&plant, &g, &cfg, &mut sig).unwrap();
        assert!(t.left_admissible_set());
        assert!(t.samples.iter().all(|x| x.abscissa < 0.0));
        assert!(t.diagnostic.is_some());
    }

    #[test]
    fn disturbance_never_exceeds_amplitude() {
        let plant = crate::sampling::random_plant(2, 2, 9).unwrap();
        let spec = DisturbanceSpec {
            kind: DisturbanceKind::BoundedNoise,
            amplitude: 0.3,
            seed: 17,
        };
        let mut sig = DisturbanceSignal::from_spec(&spec, 2, 2).unwrap();
        let mut cfg = FlowConfig::new(FlowKind::Natural, 1.0);
        cfg.s_max = 2.0;
        cfg.record_every = 1;
        cfg.converge_tol = 0.0;
        let t = integrate(&plant, &plant.optimal_gain(), &cfg, &mut sig).unwrap();
        assert!(t.samples.iter().all(|x| x.w_norm <= 0.3 + 1e-15));
        assert!(sig.realized_sup() <= 0.3);
        assert!(sig.realized_sup() > 0.0);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut cfg = FlowConfig::new(FlowKind::Newton, 0.0);
        assert!(cfg.validate().is_err());
        cfg.eta = 1.0;
        cfg.record_every = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn kind_round_trip() {
        for kind in FlowKind::ALL {
            assert_eq!(kind.as_str().parse::<FlowKind>().unwrap(), kind);
        }
    }
}
