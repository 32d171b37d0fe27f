use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lqr_iss::{cmd_certify, cmd_counterexample, cmd_flow, cmd_saturation, cmd_sweep, CliError, ExperimentConfig, Outcome};

#[derive(Parser)]
#[command(name = "lqr-iss", version, about = "Perturbed LQR policy-gradient flow experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural lemmas on sampled stabilizing gains.
    Certify(Common),
    /// Integrate one trajectory and audit its descent inequality.
    Flow(Common),
    /// Fit the empirical ISS envelope over an amplitude grid.
    Sweep(Common),
    /// Integrate the scalar system with a constant disturbance.
    Counterexample(Common),
    /// Tabulate gradient saturation on the scalar plant.
    Saturation(Common),
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let (common, f): (&Common, fn(&ExperimentConfig) -> Result<Outcome, CliError>) = match &cli.command {
        Command::Certify(c) => (c, cmd_certify),
        Command::Flow(c) => (c, cmd_flow),
        Command::Sweep(c) => (c, cmd_sweep),
        Command::Counterexample(c) => (c, cmd_counterexample),
        Command::Saturation(c) => (c, cmd_saturation),
    };
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    f(&cfg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            println!("{}", out.message);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
