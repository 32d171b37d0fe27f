//! Experiment configuration documents.
//!
//! Every section is optional except where a command needs it; unknown
//! fields anywhere are rejected. The effective configuration (after the
//! `--seed` override) is echoed into every artifact.

use std::fs;
use std::path::{Path, PathBuf};

use lqr_iss_core::estimator::{EstimatorConfig, EstimatorScheme};
use lqr_iss_core::flows::{DisturbanceKind, DisturbanceSpec, FlowConfig, FlowKind};
use lqr_iss_core::sampling::random_plant;
use lqr_iss_core::{PlantModel, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::plant_io::{matrix_from_rows, read_plant, PlantDocument};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_plant")]
    pub plant: PlantSource,
    #[serde(default)]
    pub flow: FlowSection,
    #[serde(default)]
    pub disturbance: DisturbanceSection,
    #[serde(default)]
    pub certify: CertifySection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub counterexample: CounterexampleSection,
    #[serde(default)]
    pub saturation: SaturationSection,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
}

fn default_plant() -> PlantSource {
    PlantSource::Builtin(BuiltinPlant::OneDim)
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinPlant {
    /// `A = B = Q = R = 1`.
    OneDim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PlantSource {
    Builtin(BuiltinPlant),
    Random { n: usize, m: usize, seed: u64 },
    /// Relative paths resolve against the config file's directory.
    Path(PathBuf),
    Inline(PlantDocument),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub tol_abs: Option<f64>,
    pub tol_rel: Option<f64>,
    pub margin: Option<f64>,
    pub cond_cap: Option<f64>,
    pub max_dim: Option<usize>,
    pub kleinman_max_iters: Option<usize>,
}

impl ToleranceOverrides {
    pub fn apply(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            tol_abs: self.tol_abs.unwrap_or(d.tol_abs),
            tol_rel: self.tol_rel.unwrap_or(d.tol_rel),
            margin: self.margin.unwrap_or(d.margin),
            cond_cap: self.cond_cap.unwrap_or(d.cond_cap),
            max_dim: self.max_dim.unwrap_or(d.max_dim),
            kleinman_max_iters: self.kleinman_max_iters.unwrap_or(d.kleinman_max_iters),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialGain {
    /// Start at `K*`.
    Optimal,
    Matrix(Vec<Vec<f64>>),
    /// Draw within this Frobenius distance of `K*`.
    Random { radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSection {
    pub kind: FlowKindName,
    pub eta: f64,
    pub h: f64,
    pub s_max: f64,
    pub record_every: usize,
    pub max_halvings: u32,
    pub converge_tol: f64,
    pub initial_gain: InitialGain,
}

impl Default for FlowSection {
    fn default() -> Self {
        let d = FlowConfig::new(FlowKind::Natural, 1.0);
        Self {
            kind: FlowKindName::Natural,
            eta: d.eta,
            h: d.h,
            s_max: d.s_max,
            record_every: d.record_every,
            max_halvings: d.max_halvings,
            converge_tol: d.converge_tol,
            initial_gain: InitialGain::Random { radius: 0.5 },
        }
    }
}

impl FlowSection {
    pub fn flow_config(&self) -> FlowConfig {
        FlowConfig {
            kind: self.kind.into(),
            eta: self.eta,
            h: self.h,
            s_max: self.s_max,
            record_every: self.record_every,
            max_halvings: self.max_halvings,
            converge_tol: self.converge_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKindName {
    Standard,
    Natural,
    Newton,
}

impl From<FlowKindName> for FlowKind {
    fn from(k: FlowKindName) -> Self {
        match k {
            FlowKindName::Standard => FlowKind::Standard,
            FlowKindName::Natural => FlowKind::Natural,
            FlowKindName::Newton => FlowKind::Newton,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    TwoPointSphere,
    CoordinateFd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DisturbanceSection {
    Zero,
    Constant {
        amplitude: f64,
        #[serde(default)]
        direction: Option<Vec<Vec<f64>>>,
    },
    Sinusoidal {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        direction: Option<Vec<Vec<f64>>>,
    },
    BoundedNoise {
        amplitude: f64,
    },
    /// `W = eta (grad J - estimate)` from a zeroth-order estimator.
    Estimator {
        radius: f64,
        num_samples: usize,
        scheme: SchemeName,
    },
}

impl Default for DisturbanceSection {
    fn default() -> Self {
        DisturbanceSection::Zero
    }
}

fn direction(rows: &Option<Vec<Vec<f64>>>) -> Result<Option<lqr_iss_core::Matrix>> {
    rows.as_deref().map(|r| matrix_from_rows("direction", r)).transpose()
}

impl DisturbanceSection {
    /// Shape of the disturbance without its amplitude; `None` for the
    /// estimator source.
    pub fn kind(&self) -> Result<Option<DisturbanceKind>> {
        Ok(Some(match self {
            DisturbanceSection::Zero => DisturbanceKind::Zero,
            DisturbanceSection::Constant { direction: d, .. } => DisturbanceKind::Constant { direction: direction(d)? },
            DisturbanceSection::Sinusoidal {
                omega, phase, direction: d, ..
            } => DisturbanceKind::Sinusoidal {
                direction: direction(d)?,
                omega: *omega,
                phase: *phase,
            },
            DisturbanceSection::BoundedNoise { .. } => DisturbanceKind::BoundedNoise,
            DisturbanceSection::Estimator { .. } => return Ok(None),
        }))
    }

    pub fn amplitude(&self) -> f64 {
        match self {
            DisturbanceSection::Zero | DisturbanceSection::Estimator { .. } => 0.0,
            DisturbanceSection::Constant { amplitude, .. }
            | DisturbanceSection::Sinusoidal { amplitude, .. }
            | DisturbanceSection::BoundedNoise { amplitude } => *amplitude,
        }
    }

    pub fn spec(&self, seed: u64) -> Result<Option<DisturbanceSpec>> {
        Ok(self.kind()?.map(|kind| DisturbanceSpec {
            kind,
            amplitude: self.amplitude(),
            seed,
        }))
    }

    pub fn estimator(&self, seed: u64) -> Option<EstimatorConfig> {
        match self {
            DisturbanceSection::Estimator {
                radius,
                num_samples,
                scheme,
            } => Some(EstimatorConfig {
                radius: *radius,
                num_samples: *num_samples,
                seed,
                scheme: match scheme {
                    SchemeName::TwoPointSphere => EstimatorScheme::TwoPointSphere,
                    SchemeName::CoordinateFd => EstimatorScheme::CoordinateFD,
                },
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPlantBatch {
    pub count: usize,
    pub n_max: usize,
    pub m_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertifySection {
    pub radii: Vec<f64>,
    pub samples_per_radius: usize,
    /// Certify a batch of random plants instead of `plant`.
    pub random_plants: Option<RandomPlantBatch>,
}

impl Default for CertifySection {
    fn default() -> Self {
        Self {
            radii: vec![0.1, 1.0, 10.0],
            samples_per_radius: 200,
            random_plants: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub amplitudes: Vec<f64>,
    pub seeds: usize,
    pub init_radius: f64,
    pub spread_factor: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            amplitudes: vec![0.0, 0.01, 0.02, 0.05, 0.1],
            seeds: 5,
            init_radius: 0.5,
            spread_factor: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CounterexampleSection {
    pub w_bar: f64,
    pub chi0: Vec<f64>,
    pub t_max: f64,
    pub record_every: usize,
}

impl Default for CounterexampleSection {
    fn default() -> Self {
        Self {
            w_bar: 0.4,
            chi0: vec![1.0, 3.0],
            t_max: 1e7,
            record_every: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SaturationSection {
    pub z_grid: Vec<f64>,
}

impl Default for SaturationSection {
    fn default() -> Self {
        let mut z_grid = vec![1.0 + 2f64.sqrt()];
        z_grid.extend((0..=24).map(|i| 1.0 + 10f64.powf(-3.0 + 0.375 * i as f64)));
        z_grid.sort_by(f64::total_cmp);
        Self { z_grid }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| CliError::Parse {
            path: origin.to_path_buf(),
            source,
        })
    }

    /// Reads `path`, resolving a relative plant path against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_json(&text, path)?;
        if let PlantSource::Path(p) = &mut cfg.plant {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.apply()
    }

    pub fn build_plant(&self) -> Result<PlantModel> {
        let tol = self.tolerances();
        match &self.plant {
            PlantSource::Builtin(BuiltinPlant::OneDim) => {
                let one = lqr_iss_core::Matrix::from_element(1, 1, 1.0);
                Ok(PlantModel::with_tolerances(one.clone(), one.clone(), one.clone(), one, tol)?)
            }
            PlantSource::Random { n, m, seed } => {
                if *n == 0 || *m == 0 || *n > tol.max_dim {
                    return Err(CliError::config(format!("random plant dimensions n = {n}, m = {m} out of range")));
                }
                Ok(random_plant(*n, *m, *seed)?)
            }
            PlantSource::Path(p) => read_plant(p, tol),
            PlantSource::Inline(doc) => doc.build(tol),
        }
    }

    /// Checks cross-field constraints that serde cannot express.
    pub fn validate(&self) -> Result<()> {
        let t = self.tolerances();
        if !(t.tol_abs >= 0.0 && t.tol_rel >= 0.0 && t.margin >= 0.0 && t.cond_cap > 1.0 && t.max_dim > 0) {
            return Err(CliError::config("tolerance overrides out of range"));
        }
        self.flow.flow_config().validate()?;
        if let InitialGain::Random { radius } = self.flow.initial_gain {
            if !(radius >= 0.0) || !radius.is_finite() {
                return Err(CliError::config("flow.initial_gain.random.radius must be nonnegative"));
            }
        }
        let amp = self.disturbance.amplitude();
        if !(amp >= 0.0) || !amp.is_finite() {
            return Err(CliError::config("disturbance amplitude must be finite and nonnegative"));
        }
        if let Some(e) = self.disturbance.estimator(0) {
            e.validate()?;
        }
        if self.certify.radii.is_empty() || self.certify.radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(CliError::config("certify.radii must be a nonempty list of positive radii"));
        }
        if self.certify.samples_per_radius == 0 {
            return Err(CliError::config("certify.samples_per_radius must be positive"));
        }
        if let Some(b) = &self.certify.random_plants {
            if b.count == 0 || b.n_max == 0 || b.m_max == 0 || b.n_max > t.max_dim {
                return Err(CliError::config("certify.random_plants needs positive count, n_max and m_max"));
            }
        }
        let s = &self.sweep;
        if s.amplitudes.is_empty() {
            return Err(CliError::config("sweep.amplitudes is empty"));
        }
        if s.amplitudes.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) || s.amplitudes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::config("sweep.amplitudes must be nonnegative and strictly increasing"));
        }
        if s.seeds < 5 {
            return Err(CliError::config("sweep.seeds must be at least 5"));
        }
        let c = &self.counterexample;
        if !(0.0..0.5).contains(&c.w_bar) {
            return Err(CliError::config("counterexample.w_bar must lie in [0, 0.5)"));
        }
        if c.chi0.is_empty() || c.chi0.iter().any(|x| !x.is_finite()) {
            return Err(CliError::config("counterexample.chi0 must be a nonempty list of finite values"));
        }
        if !(c.t_max >= 0.0) || !c.t_max.is_finite() || c.record_every == 0 {
            return Err(CliError::config("counterexample.t_max must be finite and record_every positive"));
        }
        let z = &self.saturation.z_grid;
        if z.is_empty() || z.iter().any(|z| !(*z > 1.0) || !z.is_finite()) {
            return Err(CliError::config("saturation.z_grid must be a nonempty list of values above 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_json(text, Path::new("test.json"))
    }

    #[test]
    fn empty_document_uses_defaults() {
        let cfg = parse("{}").unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.plant, PlantSource::Builtin(BuiltinPlant::OneDim));
        assert_eq!(cfg.disturbance, DisturbanceSection::Zero);
    }

    #[test]
    fn unknown_fields_rejected_at_every_level() {
        assert!(parse(r#"{"bogus": 1}"#).is_err());
        assert!(parse(r#"{"flow": {"kind": "natural", "speed": 2}}"#).is_err());
        assert!(parse(r#"{"disturbance": {"kind": "bounded_noise", "amplitude": 0.1, "x": 1}}"#).is_err());
        assert!(parse(r#"{"plant": {"random": {"n": 2, "m": 1, "seed": 0, "k": 1}}}"#).is_err());
    }

    #[test]
    fn plant_sources_parse() {
        let cfg = parse(r#"{"plant": {"random": {"n": 4, "m": 2, "seed": 7}}}"#).unwrap();
        let plant = cfg.build_plant().unwrap();
        assert_eq!((plant.n(), plant.m()), (4, 2));
        let inline = parse(r#"{"plant": {"inline": {"A": [[-1]], "B": [[1]], "Q": [[1]], "R": [[1]]}}}"#).unwrap();
        assert_eq!(inline.build_plant().unwrap().n(), 1);
        let builtin = parse(r#"{"plant": {"builtin": "one_dim"}}"#).unwrap();
        assert_eq!(builtin.build_plant().unwrap().optimal_cost(), PlantModel::one_dim().optimal_cost());
    }

    #[test]
    fn validation_catches_bad_grids() {
        let mut cfg = parse("{}").unwrap();
        cfg.sweep.amplitudes.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = parse("{}").unwrap();
        cfg.sweep.amplitudes = vec![0.1, 0.05];
        assert!(cfg.validate().is_err());
        let mut cfg = parse("{}").unwrap();
        cfg.counterexample.w_bar = 0.5;
        assert!(cfg.validate().is_err());
        let mut cfg = parse("{}").unwrap();
        cfg.flow.eta = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = parse(r#"{"disturbance": {"kind": "sinusoidal", "amplitude": 0.2, "omega": 3.0}, "seed": 9}"#).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(parse(&text).unwrap(), cfg);
    }
}
