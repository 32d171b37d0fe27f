//! Experiment runner around `lqr-iss-core`: JSON plant and experiment
//! documents, CSV/JSON artifacts, and rayon-parallel batches.

pub mod batch;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plant_io;

pub use commands::{cmd_certify, cmd_counterexample, cmd_flow, cmd_saturation, cmd_sweep, Outcome};
pub use config::ExperimentConfig;
pub use error::{exit, CliError};
