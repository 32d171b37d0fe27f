use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flows::{integrate, DisturbanceKind, DisturbanceSignal, DisturbanceSpec, FlowConfig, FlowExit};
use crate::model::PlantModel;
use crate::sampling::{sample_stabilizing_gain, stream_rng};

/// Fraction of the horizon averaged for the asymptotic level.
pub const TAIL_FRACTION: f64 = 0.1;

/// Sweep of one flow over disturbance amplitudes and seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeConfig {
    /// Flow parameters shared by every run; `converge_tol` only applies at
    /// amplitude zero.
    pub flow: FlowConfig,
    /// Strictly increasing, nonnegative.
    pub amplitudes: Vec<f64>,
    /// At least five.
    pub seeds: Vec<u64>,
    /// Shape of `W`; its amplitude and seed are set per run.
    pub disturbance: DisturbanceKind,
    /// Initial gains are drawn within this distance of `K*` (zero starts at
    /// `K*`).
    pub init_radius: f64,
    /// Monotonicity allowance in units of the seed-to-seed spread.
    pub spread_factor: f64,
}

impl EnvelopeConfig {
    pub fn new(flow: FlowConfig, amplitudes: Vec<f64>, seeds: Vec<u64>, disturbance: DisturbanceKind) -> Self {
        Self {
            flow,
            amplitudes,
            seeds,
            disturbance,
            init_radius: 0.5,
            spread_factor: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.flow.validate()?;
        if self.amplitudes.is_empty() {
            return Err(Error::InvalidConfig("amplitude grid is empty"));
        }
        if self.amplitudes.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::InvalidConfig("amplitudes must be finite and nonnegative"));
        }
        if self.amplitudes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("amplitudes must be strictly increasing"));
        }
        if self.seeds.len() < 5 {
            return Err(Error::InvalidConfig("envelope needs at least five seeds"));
        }
        if !(self.init_radius >= 0.0) {
            return Err(Error::InvalidConfig("init_radius must be nonnegative"));
        }
        if !(self.spread_factor >= 0.0) {
            return Err(Error::InvalidConfig("spread_factor must be nonnegative"));
        }
        Ok(())
    }
}

/// Outcome of one `(amplitude, seed)` trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeRun {
    pub amplitude_index: usize,
    pub amplitude: f64,
    pub seed: u64,
    pub exit: FlowExit,
    pub v3_initial: f64,
    pub v3_sup: f64,
    /// Mean of `V3` over the last tenth of the horizon.
    pub v3_tail: f64,
    pub w_sup: f64,
}

/// Runs one point of the sweep; independent of every other point, so
/// callers may distribute these freely.
pub fn run_envelope_point(plant: &PlantModel, cfg: &EnvelopeConfig, amplitude_index: usize, seed: u64) -> Result<EnvelopeRun> {
    let amplitude = *cfg
        .amplitudes
        .get(amplitude_index)
        .ok_or(Error::InvalidConfig("amplitude index out of range"))?;
    let k0 = if cfg.init_radius > 0.0 {
        let mut rng = stream_rng(seed, 1);
        sample_stabilizing_gain(plant, cfg.init_radius, &mut rng, 1000)
            .ok_or(Error::InvalidConfig("no stabilizing initial gain within init_radius"))?
            .0
    } else {
        plant.optimal_gain()
    };
    let mut flow = cfg.flow.clone();
    if amplitude > 0.0 {
        flow.converge_tol = 0.0;
    }
    let spec = DisturbanceSpec {
        kind: cfg.disturbance.clone(),
        amplitude,
        seed,
    };
    let mut signal = DisturbanceSignal::from_spec(&spec, plant.m(), plant.n())?;
    let traj = integrate(plant, &k0, &flow, &mut signal)?;
    let v3_initial = traj.samples[0].v3;
    let v3_sup = traj.samples.iter().map(|s| s.v3).fold(0.0, f64::max);
    let v3_tail = match traj.exit {
        FlowExit::Converged => traj.last().v3,
        _ => {
            let start = (1.0 - TAIL_FRACTION) * flow.s_max;
            let tail: Vec<f64> = traj.samples.iter().filter(|s| s.s >= start).map(|s| s.v3).collect();
            if tail.is_empty() {
                traj.last().v3
            } else {
                tail.iter().sum::<f64>() / tail.len() as f64
            }
        }
    };
    Ok(EnvelopeRun {
        amplitude_index,
        amplitude,
        seed,
        exit: traj.exit,
        v3_initial,
        v3_sup,
        v3_tail,
        w_sup: signal.realized_sup(),
    })
}

/// Aggregate over seeds at one amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopePoint {
    pub amplitude: f64,
    /// Max over seeds of the tail level of `V3`.
    pub gamma_hat: f64,
    /// Max minus min of the tail level over seeds.
    pub spread: f64,
    pub runs: usize,
    pub left_admissible_set: usize,
    /// Max over seeds of `sup V3 / (V3(0) + gamma_hat)`; values above one
    /// mean the transient overshot its start plus the asymptotic level.
    pub transient_ratio: f64,
}

impl EnvelopePoint {
    /// Some seed left the stabilizing set at this amplitude.
    pub fn exceeds_small_disturbance_range(&self) -> bool {
        self.left_admissible_set > 0
    }
}

/// Empirical asymptotic gain of one flow on one plant.
#[derive(Debug, Clone, PartialEq)]
pub struct IssEnvelope {
    pub points: Vec<EnvelopePoint>,
    /// Number of leading amplitudes before the first admissible-set exit;
    /// the monotonicity claim covers only these.
    pub claim_len: usize,
    /// Indices `i` in the claimed range where `gamma_hat[i]` fell below
    /// `gamma_hat[i - 1]` by more than the allowed spread.
    pub monotonicity_violations: Vec<usize>,
    /// `gamma_hat` at amplitude zero, if the grid contains it.
    pub gamma_zero: Option<f64>,
}

impl IssEnvelope {
    /// Aggregates runs in any order.
    pub fn from_runs(cfg: &EnvelopeConfig, runs: &[EnvelopeRun]) -> Self {
        let mut points = Vec::with_capacity(cfg.amplitudes.len());
        for (i, &amplitude) in cfg.amplitudes.iter().enumerate() {
            let mine: Vec<&EnvelopeRun> = runs.iter().filter(|r| r.amplitude_index == i).collect();
            let ok: Vec<&&EnvelopeRun> = mine.iter().filter(|r| r.exit != FlowExit::LeftAdmissibleSet).collect();
            let gamma_hat = ok.iter().map(|r| r.v3_tail).fold(0.0, f64::max);
            let low = ok.iter().map(|r| r.v3_tail).fold(f64::INFINITY, f64::min);
            let spread = if ok.is_empty() { 0.0 } else { gamma_hat - low };
            let transient_ratio = ok
                .iter()
                .map(|r| {
                    let denom = r.v3_initial + gamma_hat;
                    if denom > 0.0 {
                        r.v3_sup / denom
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max);
            points.push(EnvelopePoint {
                amplitude,
                gamma_hat,
                spread,
                runs: mine.len(),
                left_admissible_set: mine.len() - ok.len(),
                transient_ratio,
            });
        }
        let claim_len = points
            .iter()
            .position(|p| p.exceeds_small_disturbance_range())
            .unwrap_or(points.len());
        let monotonicity_violations = (1..claim_len)
            .filter(|&i| {
                let allowed = cfg.spread_factor * points[i].spread.max(points[i - 1].spread) + 1e-12;
                points[i].gamma_hat < points[i - 1].gamma_hat - allowed
            })
            .collect();
        let gamma_zero = points.iter().find(|p| p.amplitude == 0.0).map(|p| p.gamma_hat);
        Self {
            points,
            claim_len,
            monotonicity_violations,
            gamma_zero,
        }
    }

    pub fn is_monotone(&self) -> bool {
        self.monotonicity_violations.is_empty()
    }

    /// `gamma_hat(0) <= 1e-8` (vacuous without a zero amplitude).
    pub fn zero_level_ok(&self) -> bool {
        self.gamma_zero.is_none_or(|g| g <= 1e-8)
    }

    pub fn gamma_hats(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.gamma_hat).collect()
    }
}

/// Runs every `(amplitude, seed)` pair sequentially and aggregates.
pub fn fit_envelope(plant: &PlantModel, cfg: &EnvelopeConfig) -> Result<IssEnvelope> {
    cfg.validate()?;
    let mut runs = Vec::with_capacity(cfg.amplitudes.len() * cfg.seeds.len());
    for i in 0..cfg.amplitudes.len() {
        for &seed in &cfg.seeds {
            runs.push(run_envelope_point(plant, cfg, i, seed)?);
        }
    }
    Ok(IssEnvelope::from_runs(cfg, &runs))
}
