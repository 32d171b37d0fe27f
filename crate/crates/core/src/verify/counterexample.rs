use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `|chi|` beyond which a run counts as divergent.
pub const DIVERGENCE_LEVEL: f64 = 1e6;

/// Integration of `d chi/dt = -chi / (1 + chi^2) + w_bar` from `chi0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleRun {
    pub w_bar: f64,
    pub chi0: f64,
    pub t_max: f64,
    /// Unstable equilibrium `(1 + sqrt(1 - 4 w_bar^2)) / (2 w_bar)`; `None`
    /// when `w_bar = 0`.
    pub threshold: Option<f64>,
    pub diverged: bool,
    /// Stopped early because the vector field vanished numerically.
    pub settled: bool,
    pub t_end: f64,
    pub chi_end: f64,
    pub sup_abs_chi: f64,
    /// `(t, chi)` every few hundred steps plus the endpoints.
    pub trace: Vec<(f64, f64)>,
}

pub fn counterexample_threshold(w_bar: f64) -> Result<Option<f64>> {
    check_w_bar(w_bar)?;
    if w_bar == 0.0 {
        return Ok(None);
    }
    Ok(Some((1.0 + libm::sqrt(1.0 - 4.0 * w_bar * w_bar)) / (2.0 * w_bar)))
}

fn check_w_bar(w_bar: f64) -> Result<()> {
    if !(0.0..0.5).contains(&w_bar) {
        return Err(Error::InvalidWBar(w_bar));
    }
    Ok(())
}

fn field(chi: f64, w_bar: f64) -> f64 {
    -chi / (1.0 + chi * chi) + w_bar
}

pub fn run_counterexample(w_bar: f64, chi0: f64, t_max: f64) -> Result<CounterexampleRun> {
    run_counterexample_with(w_bar, chi0, t_max, 200)
}

/// RK4 with step `0.01 max(1, |chi|)`: the field is `O(1)`, so the relative
/// change per step stays near one percent even far out.
pub fn run_counterexample_with(w_bar: f64, chi0: f64, t_max: f64, record_every: usize) -> Result<CounterexampleRun> {
    let threshold = counterexample_threshold(w_bar)?;
    if !chi0.is_finite() {
        return Err(Error::InvalidConfig("chi0 must be finite"));
    }
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidConfig("t_max must be finite and nonnegative"));
    }
    let record_every = record_every.max(1);
    let mut t = 0.0;
    let mut chi = chi0;
    let mut sup = chi.abs();
    let mut trace = Vec::new();
    trace.push((t, chi));
    let mut diverged = chi.abs() > DIVERGENCE_LEVEL;
    let mut settled = false;
    let mut steps = 0usize;
    while !diverged && t < t_max {
        if field(chi, w_bar).abs() < 1e-13 {
            settled = true;
            break;
        }
        let h = (0.01 * chi.abs().max(1.0)).min(t_max - t);
        let k1 = field(chi, w_bar);
        let k2 = field(chi + 0.5 * h * k1, w_bar);
        let k3 = field(chi + 0.5 * h * k2, w_bar);
        let k4 = field(chi + h * k3, w_bar);
        chi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        steps += 1;
        sup = sup.max(chi.abs());
        diverged = chi.abs() > DIVERGENCE_LEVEL;
        if steps % record_every == 0 {
            trace.push((t, chi));
        }
    }
    if trace.last() != Some(&(t, chi)) {
        trace.push((t, chi));
    }
    Ok(CounterexampleRun {
        w_bar,
        chi0,
        t_max,
        threshold,
        diverged,
        settled,
        t_end: t,
        chi_end: chi,
        sup_abs_chi: sup,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_at_point_four_is_two() {
        assert!((counterexample_threshold(0.4).unwrap().unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn dichotomy_at_point_four() {
        assert!(run_counterexample(0.4, 3.0, 1e7).unwrap().diverged);
        let below = run_counterexample(0.4, 1.0, 1e3).unwrap();
        assert!(!below.diverged);
        assert!(below.sup_abs_chi <= 2.0);
    }

    #[test]
    fn unforced_system_decays() {
        let run = run_counterexample(0.0, 5.0, 1e3).unwrap();
        assert!(!run.diverged);
        assert!(run.chi_end.abs() < 1e-10);
        assert_eq!(run.threshold, None);
    }

    #[test]
    fn w_bar_out_of_range() {
        assert_eq!(run_counterexample(0.5, 1.0, 1.0).unwrap_err(), Error::InvalidWBar(0.5));
        assert!(run_counterexample(-0.1, 1.0, 1.0).is_err());
    }
}
