use alloc::vec::Vec;

use crate::bounds::{BoundId, BoundReport, PlCertificate};
use crate::error::Result;
use crate::flows::{lyapunov_values, FlowKind, Trajectory};
use crate::model::PlantModel;

/// Pointwise dissipation checks along a recorded trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentAudit {
    pub kind: FlowKind,
    /// One report per sample whose disturbance lies below the threshold.
    pub reports: Vec<BoundReport>,
    /// Samples skipped because `||W||` exceeded the threshold.
    pub skipped: usize,
}

impl DescentAudit {
    pub fn worst_slack(&self) -> f64 {
        self.reports.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min)
    }
}

/// Disturbance level below which the dissipation claim of `kind` applies.
///
/// - standard: `eta / sqrt(2) * xi1(V3)`
/// - natural: `sqrt(eta^2 l Q_min V5 / (2 V5 + 2 b1))` with `l = min(R_min, 1)`
/// - Newton: `sqrt(eta^2 Q_min V6 / (4 ||R|| (V6 + c1)))` with
///   `c1 = Q_min ||Y*|| + Tr(P*)`
pub fn audit_threshold(cert: &PlCertificate, kind: FlowKind, eta: f64, v: f64) -> Result<f64> {
    Ok(match kind {
        FlowKind::Standard => eta / core::f64::consts::SQRT_2 * cert.xi1(v)?,
        FlowKind::Natural => {
            let l = cert.eigmin_r.min(1.0);
            libm::sqrt(eta * eta * l * cert.eigmin_q * v / (2.0 * v + 2.0 * cert.b1))
        }
        FlowKind::Newton => {
            let c1 = cert.eigmin_q * cert.eigmax_y_star + cert.trace_p_star;
            libm::sqrt(eta * eta * cert.eigmin_q * v / (4.0 * cert.norm_r * (v + c1)))
        }
    })
}

/// Evaluates, at every recorded sample whose `W` is below
/// [`audit_threshold`], the derivative of the flow's Lyapunov function
/// along `dK/ds = D(K) + W` against its claimed decay:
///
/// - standard: `d V3/ds <= -(eta/4) xi1(V3)^2`
/// - natural: `d V5/ds <= -(eta l / 2) V5`
/// - Newton: `d V6/ds <= -(eta/4) V6`
///
/// Reports store the claimed bound as `lhs` and the derivative as `rhs`.
pub fn descent_inequality_audit(traj: &Trajectory, plant: &PlantModel, cert: &PlCertificate) -> Result<DescentAudit> {
    let kind = traj.kind;
    let eta = traj.eta;
    let opt = plant.optimal();
    let mut reports = Vec::new();
    let mut skipped = 0;
    for sample in &traj.samples {
        let gain = plant.gain(sample.k.clone())?;
        let bundle = plant.evaluate(&gain)?;
        let values = lyapunov_values(plant, &bundle);
        let delta = &bundle.k - &opt.k_star;
        let velocity = kind.drift(&bundle, eta) + &sample.w;
        let (v, lyap_grad, bound) = match kind {
            FlowKind::Standard => {
                let xi = cert.xi1(values.v3)?;
                (values.v3, bundle.grad.clone(), -0.25 * eta * xi * xi)
            }
            FlowKind::Natural => {
                let l = cert.eigmin_r.min(1.0);
                (values.v5, &bundle.grad + &delta * &opt.y_star, -0.5 * eta * l * values.v5)
            }
            FlowKind::Newton => (
                values.v6,
                &bundle.grad + plant.r() * &delta * &opt.y_star,
                -0.25 * eta * values.v6,
            ),
        };
        if sample.w.norm() > audit_threshold(cert, kind, eta, v)? {
            skipped += 1;
            continue;
        }
        let derivative = lyap_grad.dot(&velocity);
        reports.push(BoundReport::new(BoundId::Descent(kind), bound, derivative, false, delta.norm()));
    }
    Ok(DescentAudit { kind, reports, skipped })
}
