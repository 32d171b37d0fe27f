use lqr_iss_core::bounds::{PlCertificate, SlackTolerance};
use lqr_iss_core::estimator::residual_signal;
use lqr_iss_core::flows::{integrate, DisturbanceSignal, FlowExit, Trajectory};
use lqr_iss_core::sampling::{derive_seed, sample_stabilizing_gain, stream_rng};
use lqr_iss_core::verify::{
    descent_inequality_audit, run_counterexample_with, saturation_demo, EnvelopeConfig, EnvelopePoint,
};
use lqr_iss_core::{GainMatrix, PlantModel};
use serde::Serialize;

use crate::batch::{certify_plants, random_plant_batch, sweep_envelope, sweep_seeds, LemmaSummary, MAX_GAIN_DRAWS};
use crate::config::{ExperimentConfig, InitialGain};
use crate::error::{exit, CliError, Result};
use crate::output::{num, Artifacts};
use crate::plant_io::{matrix_from_rows, matrix_to_rows, write_plant};

/// One line per artifact written plus the exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub message: String,
}

fn outcome(code: i32, message: String) -> Result<Outcome> {
    Ok(Outcome { code, message })
}

#[derive(Serialize)]
struct CertifyReport {
    plants: usize,
    samples: usize,
    draw_failures: usize,
    violations: usize,
    passed: bool,
    lemmas: Vec<LemmaSummary>,
}

pub fn cmd_certify(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let c = &cfg.certify;
    let plants = match &c.random_plants {
        Some(b) => random_plant_batch(b.count, b.n_max, b.m_max, cfg.seed)?,
        None => vec![cfg.build_plant()?],
    };
    let result = certify_plants(&plants, &c.radii, c.samples_per_radius, cfg.seed);
    let art = Artifacts::create(cfg, "certify")?;
    if plants.len() == 1 {
        write_plant(&art.path("plant.json"), &plants[0])?;
    }
    art.csv(
        "lemmas.csv",
        &["lemma_id", "plant", "seed", "radius", "dist", "lhs", "rhs", "slack", "pass"],
        result.rows.iter().map(|r| {
            vec![
                r.lemma().as_str().to_string(),
                r.plant.to_string(),
                r.stream.to_string(),
                num(r.radius),
                num(r.report.distance),
                num(r.report.lhs),
                num(r.report.rhs),
                num(r.report.slack),
                r.passes().to_string(),
            ]
        }),
    )?;
    let violations = result.violations();
    let report = CertifyReport {
        plants: plants.len(),
        samples: result.samples,
        draw_failures: result.draw_failures,
        violations,
        passed: violations == 0,
        lemmas: result.summary(),
    };
    art.json("certify_summary.json", &report)?;
    let code = if violations == 0 { exit::OK } else { exit::CHECK_FAILED };
    outcome(
        code,
        format!(
            "certify: {} plants, {} samples, {} violations -> {}",
            report.plants,
            report.samples,
            violations,
            art.dir().display()
        ),
    )
}

fn initial_gain(cfg: &ExperimentConfig, plant: &PlantModel) -> Result<GainMatrix> {
    let gain = match &cfg.flow.initial_gain {
        InitialGain::Optimal => plant.optimal_gain(),
        InitialGain::Random { radius } if *radius == 0.0 => plant.optimal_gain(),
        InitialGain::Random { radius } => {
            let mut rng = stream_rng(cfg.seed, 0);
            sample_stabilizing_gain(plant, *radius, &mut rng, MAX_GAIN_DRAWS)
                .ok_or_else(|| CliError::config("no stabilizing initial gain found within the radius"))?
                .0
        }
        InitialGain::Matrix(rows) => plant.gain(matrix_from_rows("initial_gain", rows)?).map_err(|e| CliError::config(format!("initial_gain: {e}")))?,
    };
    if !gain.is_stabilizing() {
        return Err(CliError::config(format!(
            "initial gain is not stabilizing (spectral abscissa {})",
            gain.spectral_abscissa()
        )));
    }
    Ok(gain)
}

#[derive(Serialize)]
struct SampleSummary {
    s: f64,
    v3: f64,
    v4: f64,
    v5: f64,
    v6: f64,
    grad_norm: f64,
    abscissa: f64,
    k: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct EstimatorSummary {
    realized_sup: f64,
    rejections: u64,
    estimates: u64,
}

#[derive(Serialize)]
struct AuditSummary {
    audited: usize,
    skipped: usize,
    violations: usize,
    worst_slack: Option<f64>,
}

#[derive(Serialize)]
struct FlowReport {
    kind: &'static str,
    eta: f64,
    seed: u64,
    exit: &'static str,
    exit_s: f64,
    steps: usize,
    diagnostic: Option<String>,
    recorded: usize,
    initial: SampleSummary,
    last: SampleSummary,
    disturbance: &'static str,
    disturbance_amplitude: f64,
    disturbance_realized_sup: f64,
    estimator: Option<EstimatorSummary>,
    audit: AuditSummary,
}

fn summarize(s: &lqr_iss_core::TrajectorySample) -> SampleSummary {
    SampleSummary {
        s: s.s,
        v3: s.v3,
        v4: s.v4,
        v5: s.v5,
        v6: s.v6,
        grad_norm: s.grad_norm,
        abscissa: s.abscissa,
        k: matrix_to_rows(&s.k),
    }
}

/// Integrates one trajectory as configured.
pub fn run_flow(cfg: &ExperimentConfig, plant: &PlantModel) -> Result<(Trajectory, DisturbanceSignal)> {
    let flow = cfg.flow.flow_config();
    let k0 = initial_gain(cfg, plant)?;
    let mut signal = match cfg.disturbance.spec(derive_seed(cfg.seed, 1))? {
        Some(spec) => DisturbanceSignal::from_spec(&spec, plant.m(), plant.n())?,
        None => {
            let est = cfg.disturbance.estimator(derive_seed(cfg.seed, 2)).expect("estimator section");
            residual_signal(&est, flow.eta)?
        }
    };
    let traj = integrate(plant, &k0, &flow, &mut signal)?;
    Ok((traj, signal))
}

pub fn cmd_flow(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let plant = cfg.build_plant()?;
    let (traj, signal) = run_flow(cfg, &plant)?;
    let cert = PlCertificate::new(&plant);
    let audit = descent_inequality_audit(&traj, &plant, &cert)?;
    let art = Artifacts::create(cfg, "flow")?;
    write_plant(&art.path("plant.json"), &plant)?;
    art.csv(
        "trajectory.csv",
        &["s", "V3", "V4", "V5", "V6", "grad_norm", "W_norm", "abscissa"],
        traj.samples.iter().map(|s| {
            vec![
                num(s.s),
                num(s.v3),
                num(s.v4),
                num(s.v5),
                num(s.v6),
                num(s.grad_norm),
                num(s.w_norm),
                num(s.abscissa),
            ]
        }),
    )?;
    let report = FlowReport {
        kind: traj.kind.as_str(),
        eta: traj.eta,
        seed: cfg.seed,
        exit: traj.exit.as_str(),
        exit_s: traj.exit_s,
        steps: traj.steps,
        diagnostic: traj.diagnostic.clone(),
        recorded: traj.samples.len(),
        initial: summarize(&traj.samples[0]),
        last: summarize(traj.last()),
        disturbance: signal.kind_name(),
        disturbance_amplitude: cfg.disturbance.amplitude(),
        disturbance_realized_sup: signal.realized_sup(),
        estimator: signal.estimator_diagnostics().map(|d| EstimatorSummary {
            realized_sup: d.realized_sup,
            rejections: d.rejections,
            estimates: d.estimates,
        }),
        audit: AuditSummary {
            audited: audit.reports.len(),
            skipped: audit.skipped,
            violations: audit.reports.iter().filter(|r| !r.passes(SlackTolerance::AUDIT)).count(),
            worst_slack: (!audit.reports.is_empty()).then(|| audit.worst_slack()),
        },
    };
    art.json("trajectory.json", &report)?;
    let code = if traj.exit == FlowExit::LeftAdmissibleSet {
        exit::LEFT_ADMISSIBLE_SET
    } else {
        exit::OK
    };
    outcome(
        code,
        format!(
            "flow: {} exit {} at s = {} with V3 = {:e} -> {}",
            report.kind,
            report.exit,
            traj.exit_s,
            traj.last().v3,
            art.dir().display()
        ),
    )
}

#[derive(Serialize)]
struct SweepReport {
    kind: &'static str,
    eta: f64,
    disturbance: &'static str,
    seeds: Vec<u64>,
    points: Vec<PointReport>,
    claim_len: usize,
    monotone: bool,
    monotonicity_violations: Vec<usize>,
    gamma_zero: Option<f64>,
    zero_level_ok: bool,
}

#[derive(Serialize)]
struct PointReport {
    amplitude: f64,
    gamma_hat: f64,
    spread: f64,
    runs: usize,
    left_admissible_set: usize,
    exceeds_small_disturbance_range: bool,
    transient_ratio: f64,
}

impl From<&EnvelopePoint> for PointReport {
    fn from(p: &EnvelopePoint) -> Self {
        Self {
            amplitude: p.amplitude,
            gamma_hat: p.gamma_hat,
            spread: p.spread,
            runs: p.runs,
            left_admissible_set: p.left_admissible_set,
            exceeds_small_disturbance_range: p.exceeds_small_disturbance_range(),
            transient_ratio: p.transient_ratio,
        }
    }
}

pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let kind = cfg
        .disturbance
        .kind()?
        .ok_or_else(|| CliError::config("sweep needs a zero, constant, sinusoidal or bounded_noise disturbance"))?;
    let plant = cfg.build_plant()?;
    let s = &cfg.sweep;
    let mut env_cfg = EnvelopeConfig::new(cfg.flow.flow_config(), s.amplitudes.clone(), sweep_seeds(cfg.seed, s.seeds), kind);
    env_cfg.init_radius = s.init_radius;
    env_cfg.spread_factor = s.spread_factor;
    let (runs, env) = sweep_envelope(&plant, &env_cfg)?;
    let art = Artifacts::create(cfg, "sweep")?;
    write_plant(&art.path("plant.json"), &plant)?;
    art.csv(
        "sweep_runs.csv",
        &["amplitude", "seed", "exit", "v3_initial", "v3_sup", "v3_tail", "w_sup"],
        runs.iter().map(|r| {
            vec![
                num(r.amplitude),
                r.seed.to_string(),
                r.exit.as_str().to_string(),
                num(r.v3_initial),
                num(r.v3_sup),
                num(r.v3_tail),
                num(r.w_sup),
            ]
        }),
    )?;
    let report = SweepReport {
        kind: env_cfg.flow.kind.as_str(),
        eta: env_cfg.flow.eta,
        disturbance: env_cfg.disturbance.name(),
        seeds: env_cfg.seeds.clone(),
        points: env.points.iter().map(PointReport::from).collect(),
        claim_len: env.claim_len,
        monotone: env.is_monotone(),
        monotonicity_violations: env.monotonicity_violations.clone(),
        gamma_zero: env.gamma_zero,
        zero_level_ok: env.zero_level_ok(),
    };
    art.json("envelope.json", &report)?;
    let ok = report.monotone && report.zero_level_ok;
    outcome(
        if ok { exit::OK } else { exit::CHECK_FAILED },
        format!(
            "sweep: {} amplitudes x {} seeds, monotone {}, gamma(0) ok {} -> {}",
            s.amplitudes.len(),
            s.seeds,
            report.monotone,
            report.zero_level_ok,
            art.dir().display()
        ),
    )
}

#[derive(Serialize)]
struct CounterexampleReport {
    w_bar: f64,
    threshold: Option<f64>,
    runs: Vec<CounterexampleSummary>,
    dichotomy_holds: bool,
}

#[derive(Serialize)]
struct CounterexampleSummary {
    chi0: f64,
    predicted_divergence: bool,
    diverged: bool,
    settled: bool,
    t_end: f64,
    chi_end: f64,
    sup_abs_chi: f64,
}

pub fn cmd_counterexample(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let c = &cfg.counterexample;
    let runs = c
        .chi0
        .iter()
        .map(|&chi0| run_counterexample_with(c.w_bar, chi0, c.t_max, c.record_every))
        .collect::<lqr_iss_core::Result<Vec<_>>>()?;
    let art = Artifacts::create(cfg, "counterexample")?;
    art.csv(
        "counterexample.csv",
        &["run", "chi0", "t", "chi"],
        runs.iter().enumerate().flat_map(|(i, r)| {
            r.trace
                .iter()
                .map(move |&(t, chi)| vec![i.to_string(), num(r.chi0), num(t), num(chi)])
        }),
    )?;
    let threshold = runs[0].threshold;
    let summaries: Vec<CounterexampleSummary> = runs
        .iter()
        .map(|r| CounterexampleSummary {
            chi0: r.chi0,
            predicted_divergence: threshold.is_some_and(|th| r.chi0 > th),
            diverged: r.diverged,
            settled: r.settled,
            t_end: r.t_end,
            chi_end: r.chi_end,
            sup_abs_chi: r.sup_abs_chi,
        })
        .collect();
    let dichotomy_holds = summaries.iter().all(|s| s.predicted_divergence == s.diverged);
    art.json(
        "counterexample.json",
        &CounterexampleReport {
            w_bar: c.w_bar,
            threshold,
            runs: summaries,
            dichotomy_holds,
        },
    )?;
    outcome(
        if dichotomy_holds { exit::OK } else { exit::CHECK_FAILED },
        format!(
            "counterexample: w_bar {} threshold {:?}, {} runs, dichotomy {} -> {}",
            c.w_bar,
            threshold,
            runs.len(),
            dichotomy_holds,
            art.dir().display()
        ),
    )
}

#[derive(Serialize)]
struct SaturationReport {
    xi1_sup: f64,
    max_xi1: f64,
    largest_z: f64,
    grad_at_largest_z: f64,
    all_hold: bool,
}

pub fn cmd_saturation(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let rows = saturation_demo(&cfg.saturation.z_grid)?;
    let cert = PlCertificate::new(&PlantModel::one_dim());
    let art = Artifacts::create(cfg, "saturation")?;
    art.csv(
        "saturation.csv",
        &["z", "grad_abs", "gap", "xi1", "holds"],
        rows.iter()
            .map(|r| vec![num(r.z), num(r.grad_abs), num(r.gap), num(r.xi1), r.holds().to_string()]),
    )?;
    let largest = rows
        .iter()
        .max_by(|a, b| a.z.total_cmp(&b.z))
        .expect("grid validated nonempty");
    let report = SaturationReport {
        xi1_sup: cert.xi1_sup(),
        max_xi1: rows.iter().map(|r| r.xi1).fold(0.0, f64::max),
        largest_z: largest.z,
        grad_at_largest_z: largest.grad_abs,
        all_hold: rows.iter().all(|r| r.holds()),
    };
    art.json("saturation.json", &report)?;
    let ok = report.all_hold && report.max_xi1 <= report.xi1_sup;
    outcome(
        if ok { exit::OK } else { exit::CHECK_FAILED },
        format!(
            "saturation: {} points, |J'| at z = {} is {}, max xi1 {} -> {}",
            rows.len(),
            largest.z,
            largest.grad_abs,
            report.max_xi1,
            art.dir().display()
        ),
    )
}
