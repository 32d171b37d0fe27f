//! Empirical checks of the stability claims: ISS envelope sweeps, the scalar
//! counterexample, the gradient saturation table and pointwise
//! descent-inequality audits.

mod audit;
mod counterexample;
mod envelope;
mod saturation;

pub use audit::{audit_threshold, descent_inequality_audit, DescentAudit};
pub use counterexample::{
    counterexample_threshold, run_counterexample, run_counterexample_with, CounterexampleRun, DIVERGENCE_LEVEL,
};
pub use envelope::{
    fit_envelope, run_envelope_point, EnvelopeConfig, EnvelopePoint, EnvelopeRun, IssEnvelope, TAIL_FRACTION,
};
pub use saturation::{saturation_demo, SaturationRow};
