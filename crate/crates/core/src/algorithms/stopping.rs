use super::config::SolverConfig;
use super::trace::{ConvergenceTrace, StopReason};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopDecision {
    pub stop: bool,
    pub reason: Option<StopReason>,
    pub e_d: f64,
    pub e_p: f64,
}

/// `max{0, beta1 sum_i D_i - ||Ax - b||^2 / (2 beta2)}`; the penalty term is
/// dropped when `beta2` is zero (no penalty smoother in use).
pub fn rdfgap(beta1: f64, sum_diameters: f64, beta2: f64, feas_norm: f64) -> f64 {
    let penalty = if beta2 > 0.0 {
        feas_norm * feas_norm / (2.0 * beta2)
    } else {
        0.0
    };
    (beta1 * sum_diameters - penalty).max(0.0)
}

/// `e_d = beta1 sum_i D_hat_i` and `e_p = beta2 [y_hat + sqrt(y_hat^2 + 2 sum_i D_hat_i)]`.
pub fn gap_estimates(beta1: f64, beta2: f64, diameters: &[f64], dual_bound: f64) -> (f64, f64) {
    let sum: f64 = diameters.iter().sum();
    let e_d = beta1 * sum;
    let e_p = beta2 * (dual_bound + (dual_bound * dual_bound + 2.0 * sum).sqrt());
    (e_d, e_p)
}

/// Relative objective change against the three previous records, all within `eps_phi`.
pub fn objective_stalled(phis: &[f64], eps_phi: f64) -> bool {
    let n = phis.len();
    if n < 4 {
        return false;
    }
    let current = phis[n - 1];
    let scale = current.abs().max(1.0);
    (1..=3).all(|j| (current - phis[n - 1 - j]).abs() / scale <= eps_phi)
}

/// Stops once `rpfgap <= eps_p` and either `rdfgap <= eps_d (|phi| + 1)` or the
/// objective stalled over three successive iterations.
pub fn stopping_check(trace: &ConvergenceTrace, config: &SolverConfig) -> StopDecision {
    let Some(last) = trace.last() else {
        return StopDecision {
            stop: false,
            reason: None,
            e_d: f64::NAN,
            e_p: f64::NAN,
        };
    };
    let mut decision = StopDecision {
        stop: false,
        reason: None,
        e_d: last.e_d,
        e_p: last.e_p,
    };
    if last.rpfgap > config.eps_p {
        return decision;
    }
    if last.rdfgap <= config.eps_d * (last.phi.abs() + 1.0) {
        decision.stop = true;
        decision.reason = Some(StopReason::Gap);
        return decision;
    }
    let start = trace.records.len().saturating_sub(4);
    let phis: Vec<f64> = trace.records[start..].iter().map(|r| r.phi).collect();
    if objective_stalled(&phis, config.eps_phi) {
        decision.stop = true;
        decision.reason = Some(StopReason::Stall);
    }
    decision
}
