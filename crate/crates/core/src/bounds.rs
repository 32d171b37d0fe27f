//! Closed-form certificate functions and the structural lemma checks.
//!
//! All constants are derived from a plant's optimal triple:
//!
//! ```text
//! a  = λmin(R) λmin(Y*) / (2 λmin(Y*) + 2 λmax(Y*))    a' = 1 / (λmin(Y*) + λmax(Y*))
//! a1 = λmin(R) a     a2 = λmin(R) a'     a3 = ||A - B K*||_F     a4 = ||B||
//! a5 = a2 a4 / (sqrt(a1) a3)             a6 = a2 a4^2 / (a1 a3)
//! b1 = ||Y*|| λmin(Q) / (2 λmin(R)) + Tr(P*)     b2 = λmin(Q)     b3 = η^2 λmin(R) λmin(Q)
//! ```

use alloc::string::ToString;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::flows::FlowKind;
use crate::linalg::{eigmax, eigmin, spectral_norm};
use crate::model::{CostBundle, GainMatrix, PlantModel};

/// Gradient-dominance and natural-flow constants of a plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlCertificate {
    pub a: f64,
    pub a_prime: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
    pub b1: f64,
    pub b2: f64,
    pub eigmin_r: f64,
    pub eigmin_q: f64,
    pub norm_r: f64,
    pub eigmin_y_star: f64,
    pub eigmax_y_star: f64,
    pub trace_p_star: f64,
    /// Set when `λmin(R) > 1`; the natural-flow rate then uses
    /// `min(λmin(R), 1)` in the descent audit.
    pub eigmin_r_exceeds_one: bool,
}

impl PlCertificate {
    pub fn new(plant: &PlantModel) -> Self {
        let opt = plant.optimal();
        let eigmin_r = eigmin(plant.r());
        let eigmin_q = eigmin(plant.q());
        let eigmin_y_star = eigmin(&opt.y_star);
        let eigmax_y_star = eigmax(&opt.y_star);
        let a = eigmin_r * eigmin_y_star / (2.0 * eigmin_y_star + 2.0 * eigmax_y_star);
        let a_prime = 1.0 / (eigmin_y_star + eigmax_y_star);
        let a1 = eigmin_r * a;
        let a2 = eigmin_r * a_prime;
        let a3 = plant.closed_loop(&opt.k_star).norm();
        let a4 = spectral_norm(plant.b());
        let a5 = a2 * a4 / (libm::sqrt(a1) * a3);
        let a6 = a2 * a4 * a4 / (a1 * a3);
        let trace_p_star = opt.p_star.trace();
        let b1 = eigmax_y_star * eigmin_q / (2.0 * eigmin_r) + trace_p_star;
        Self {
            a,
            a_prime,
            a1,
            a2,
            a3,
            a4,
            a5,
            a6,
            b1,
            b2: eigmin_q,
            eigmin_r,
            eigmin_q,
            norm_r: spectral_norm(plant.r()),
            eigmin_y_star,
            eigmax_y_star,
            trace_p_star,
            eigmin_r_exceeds_one: eigmin_r > 1.0,
        }
    }

    /// `η^2 λmin(R) λmin(Q)`.
    pub fn b3(&self, eta: f64) -> f64 {
        eta * eta * self.eigmin_r * self.eigmin_q
    }

    /// Gradient-dominance function `a5 p / (a3 + a6 p)`.
    pub fn xi1(&self, p: f64) -> Result<f64> {
        if !(p >= 0.0) {
            return Err(Error::NegativeArgument(p));
        }
        if p == f64::INFINITY {
            return Ok(self.xi1_sup());
        }
        Ok(self.a5 * p / (self.a3 + self.a6 * p))
    }

    /// Supremum of [`Self::xi1`], `sqrt(a1) / a4`.
    pub fn xi1_sup(&self) -> f64 {
        libm::sqrt(self.a1) / self.a4
    }

    /// Natural-flow disturbance threshold `sqrt(b3 v / (2 v + 2 b1))`.
    pub fn xi2(&self, v: f64, eta: f64) -> Result<f64> {
        if !(v >= 0.0) {
            return Err(Error::NegativeArgument(v));
        }
        if !(eta > 0.0) {
            return Err(Error::InvalidConfig("eta must be positive"));
        }
        if v == f64::INFINITY {
            return Ok(self.xi2_sup(eta));
        }
        Ok(libm::sqrt(self.b3(eta) * v / (2.0 * v + 2.0 * self.b1)))
    }

    /// Supremum of [`Self::xi2`], `sqrt(b3 / 2)`.
    pub fn xi2_sup(&self, eta: f64) -> f64 {
        libm::sqrt(self.b3(eta) / 2.0)
    }

    /// Coercivity bound `λmin(R) r^2 / (2 a3 + 2 a4 r)`.
    pub fn alpha4(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::NegativeArgument(r));
        }
        Ok(self.eigmin_r * r * r / (2.0 * self.a3 + 2.0 * self.a4 * r))
    }
}

pub fn xi1(cert: &PlCertificate, p: f64) -> Result<f64> {
    cert.xi1(p)
}

pub fn xi2(cert: &PlCertificate, v: f64, eta: f64) -> Result<f64> {
    cert.xi2(v, eta)
}

pub fn alpha4(cert: &PlCertificate, r: f64) -> Result<f64> {
    cert.alpha4(r)
}

/// Structural lemma checked by [`check_lemma`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LemmaId {
    /// `λmin(Y_K) >= 1 / (2 ||A - BK*||_F + 2 ||B|| ||K - K*||_F)`.
    EigminYk,
    /// `Tr(Y_K) >= Tr(P_K - P*) / (||R|| ||K - K*||_F^2)`.
    TraceYkLower,
    /// `Tr(P_K) / λmin(Q) >= Tr(Y_K)`.
    TraceYkUpper,
    /// `Tr(P_K - P*) >= alpha4(||K - K*||_F)`.
    Alpha4,
    /// `Tr(M_K) >= a ||K - K*||_F^2 + a' Tr(P_K - P*)`.
    Mk,
    /// `||grad J(K)||_F >= xi1(J(K) - J(K*))`.
    CjsPl,
    /// `2 <K-K*, R(K-K')>_{Y*} = Tr(P_K - P*) + <K-K*, R(K-K*)>_{Y*}`.
    NaturalIdentity,
}

impl LemmaId {
    pub const ALL: [LemmaId; 7] = [
        LemmaId::EigminYk,
        LemmaId::TraceYkLower,
        LemmaId::TraceYkUpper,
        LemmaId::Alpha4,
        LemmaId::Mk,
        LemmaId::CjsPl,
        LemmaId::NaturalIdentity,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LemmaId::EigminYk => "eigmin_yk",
            LemmaId::TraceYkLower => "trace_yk_lower",
            LemmaId::TraceYkUpper => "trace_yk_upper",
            LemmaId::Alpha4 => "alpha4",
            LemmaId::Mk => "mk",
            LemmaId::CjsPl => "cjs_pl",
            LemmaId::NaturalIdentity => "natural_identity",
        }
    }

    pub fn is_equality(&self) -> bool {
        matches!(self, LemmaId::NaturalIdentity)
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LemmaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LemmaId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownLemma(s.to_string()))
    }
}

/// What a [`BoundReport`] certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundId {
    Lemma(LemmaId),
    /// Dissipation inequality of a flow's Lyapunov function.
    Descent(FlowKind),
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundId::Lemma(id) => write!(f, "{id}"),
            BoundId::Descent(kind) => write!(f, "descent_{}", kind.as_str()),
        }
    }
}

/// Acceptance band for a report: `slack >= -(abs + rel * max(|lhs|, |rhs|))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlackTolerance {
    pub abs: f64,
    pub rel: f64,
}

impl SlackTolerance {
    pub const LEMMA: SlackTolerance = SlackTolerance { abs: 1e-9, rel: 1e-9 };
    pub const AUDIT: SlackTolerance = SlackTolerance { abs: 1e-8, rel: 0.0 };
}

/// Two evaluated sides of an inequality.
///
/// The claim is always `lhs >= rhs` (the larger side is stored in `lhs`,
/// also for `<=`-shaped statements), so `slack = lhs - rhs` is nonnegative
/// when the claim holds. Equalities are two-sided.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub id: BoundId,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub equality: bool,
    /// `||K - K*||_F` of the tested gain.
    pub distance: f64,
}

impl BoundReport {
    pub fn new(id: BoundId, lhs: f64, rhs: f64, equality: bool, distance: f64) -> Self {
        Self {
            id,
            lhs,
            rhs,
            slack: lhs - rhs,
            equality,
            distance,
        }
    }

    pub fn allowance(&self, tol: SlackTolerance) -> f64 {
        tol.abs + tol.rel * self.lhs.abs().max(self.rhs.abs())
    }

    pub fn passes(&self, tol: SlackTolerance) -> bool {
        let allowed = self.allowance(tol);
        if self.equality {
            self.slack.abs() <= allowed
        } else {
            self.slack >= -allowed
        }
    }
}

/// Evaluates both sides of `lemma` at a stabilizing gain.
pub fn check_lemma(plant: &PlantModel, cert: &PlCertificate, gain: &GainMatrix, lemma: LemmaId) -> Result<BoundReport> {
    let bundle = plant.evaluate(gain)?;
    Ok(check_lemma_with(plant, cert, &bundle, lemma))
}

/// [`check_lemma`] on an already evaluated bundle.
pub fn check_lemma_with(plant: &PlantModel, cert: &PlCertificate, bundle: &CostBundle, lemma: LemmaId) -> BoundReport {
    let opt = plant.optimal();
    let delta = &bundle.k - &opt.k_star;
    let dist = delta.norm();
    let gap = bundle.suboptimality(plant);
    let (lhs, rhs) = match lemma {
        LemmaId::EigminYk => (eigmin(&bundle.y), 1.0 / (2.0 * cert.a3 + 2.0 * cert.a4 * dist)),
        LemmaId::TraceYkLower => {
            let rhs = if dist > 0.0 { gap / (cert.norm_r * dist * dist) } else { 0.0 };
            (bundle.y.trace(), rhs)
        }
        LemmaId::TraceYkUpper => (bundle.cost / cert.eigmin_q, bundle.y.trace()),
        LemmaId::Alpha4 => (gap, cert.alpha4(dist).unwrap_or(0.0)),
        LemmaId::Mk => (bundle.m_k.trace(), cert.a * dist * dist + cert.a_prime * gap),
        LemmaId::CjsPl => (bundle.grad.norm(), cert.xi1(gap).unwrap_or(0.0)),
        LemmaId::NaturalIdentity => {
            let r = plant.r();
            let y_star = &opt.y_star;
            let diff = &bundle.k - &bundle.k_prime;
            let lhs = 2.0 * delta.dot(&(r * &diff * y_star));
            let rhs = gap + delta.dot(&(r * &delta * y_star));
            (lhs, rhs)
        }
    };
    BoundReport::new(BoundId::Lemma(lemma), lhs, rhs, lemma.is_equality(), dist)
}

/// Every lemma at one bundle.
pub fn check_all_with(plant: &PlantModel, cert: &PlCertificate, bundle: &CostBundle) -> [BoundReport; 7] {
    LemmaId::ALL.map(|id| check_lemma_with(plant, cert, bundle, id))
}
