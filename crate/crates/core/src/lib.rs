//! Perturbed policy-gradient flows for continuous-time LQR and numerical
//! certificates of their small-disturbance input-to-state stability.
//!
//! The crate is `no_std` with `alloc`. All IO, file formats, the CLI, and
//! parallel batch runners live in the `lqr-iss` companion crate.
//!
//! Layout:
//!
//! - [`model`]: plant data, Lyapunov and Riccati solves, cost, gradient and
//!   search directions.
//! - [`bounds`]: the gradient-dominance certificate (`xi1`), the natural-flow
//!   threshold (`xi2`), the coercivity bound (`alpha4`) and the structural
//!   lemma checks.
//! - [`flows`]: RK4 integration of the standard, natural and Newton flows
//!   under pluggable disturbances.
//! - [`estimator`]: zeroth-order gradient estimates used as a disturbance
//!   source.
//! - [`verify`]: envelope sweeps, the scalar counterexample, the saturation
//!   demo and descent-inequality audits.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod error;
pub mod estimator;
pub mod flows;
pub mod linalg;
pub mod model;
pub mod sampling;
pub mod tolerances;
pub mod verify;

pub use error::{Error, Result};
pub use tolerances::Tolerances;

pub use bounds::{BoundId, BoundReport, LemmaId, PlCertificate};
pub use estimator::{EstimatorConfig, EstimatorScheme, GradientEstimator};
pub use flows::{
    DisturbanceKind, DisturbanceSignal, DisturbanceSpec, FlowConfig, FlowExit, FlowKind, Trajectory, TrajectorySample,
};
pub use model::{CostBundle, GainMatrix, LyapunovSide, OptimalTriple, PlantModel, WeightedInner};

/// Dense real matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;

/// Library version string embedded in exported artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
