//! Fixed-smoothness baseline: accelerated gradient ascent on `d(.; c)` with
//! `c = eps_p / sum_i D_i`, primal iterate read out as the weighted average of
//! the inner minimizers.

use std::time::Instant;

use super::config::{Algorithm, SolverConfig};
use super::driver::{IterateState, RunResult, Solver};
use super::trace::{ConvergenceTrace, StopReason};
use crate::error::Result;
use crate::linalg::{norm, BlockVector};
use crate::problem::SeparableProblem;
use crate::smoothing::{gradient_step, smoothed_dual, DiameterTracker};

/// `c = eps_p / sum_i D_i` (falls back to `eps_p` when every box is a point).
pub fn baseline_smoothness(eps_p: f64, sum_diameters: f64) -> f64 {
    if sum_diameters > 0.0 {
        eps_p / sum_diameters
    } else {
        eps_p
    }
}

pub fn run_baseline_fixed(problem: &SeparableProblem, config: &SolverConfig) -> Result<RunResult> {
    let config = SolverConfig {
        algorithm: Algorithm::Baseline,
        ..config.clone()
    };
    Solver::new(problem, config)?.run()
}

fn baseline_stop(phi: f64, rpfgap: f64, config: &SolverConfig) -> Option<StopReason> {
    if !config.stopping || rpfgap > config.eps_p {
        return None;
    }
    match config.baseline_target {
        Some(target) if phi <= target => Some(StopReason::Target),
        Some(_) => None,
        None => Some(StopReason::Feasible),
    }
}

pub(crate) fn run_baseline(solver: &Solver<'_>) -> Result<RunResult> {
    let problem = solver.problem();
    let config = solver.config();
    let constants = solver.constants();
    let tol = config.inner_tolerance;
    let started = Instant::now();
    let c = baseline_smoothness(config.eps_p, constants.sum_diameters());
    let step = 1.0 / constants.dual_lipschitz(c);
    let m = problem.num_rows();

    let mut u = vec![0.0; m];
    let mut at_u = smoothed_dual(problem, &u, c, tol)?;
    let mut weighted_grad = vec![0.0; m];
    let mut x_avg: BlockVector = at_u.minimizers.clone();
    let mut weight_total = 0.0;

    let assemble = |x: BlockVector, y: Vec<f64>, dual_value: f64, minimizers: BlockVector, k: usize| -> Result<IterateState> {
        let residual = problem.residual(&x);
        let phi = problem.objective_value(&x)?;
        Ok(IterateState {
            residual_norm: norm(&residual),
            residual,
            phi,
            f_value: phi,
            dual_value,
            dual_minimizers: minimizers,
            x_bar: x,
            y_bar: y,
            beta1: c,
            beta2: 0.0,
            tau: 0.0,
            k,
        })
    };

    let mut state = assemble(x_avg.clone(), u.clone(), at_u.value, at_u.minimizers.clone(), 0)?;
    let mut tracker = DiameterTracker::new(problem.num_components());
    tracker.observe(problem, &state.x_bar, &state.y_bar);
    let mut trace = ConvergenceTrace::default();
    trace.records.push(solver.record_for_baseline(&state, &tracker, started));

    let stop_reason = loop {
        let last = trace.last().expect("trace has the initial record");
        if let Some(reason) = baseline_stop(last.phi, last.rpfgap, config) {
            break reason;
        }
        if state.k >= config.max_iter {
            break StopReason::MaxIter;
        }
        let j = state.k;
        let y = gradient_step(&u, &at_u.gradient, step);
        let w = (j + 1) as f64;
        weight_total += w;
        for (xa, xs) in x_avg.iter_mut().zip(&at_u.minimizers) {
            for (a, s) in xa.iter_mut().zip(xs) {
                *a += (w / weight_total) * (s - *a);
            }
        }
        for (s, g) in weighted_grad.iter_mut().zip(&at_u.gradient) {
            *s += 0.5 * w * g;
        }
        let kk = j as f64;
        u = y
            .iter()
            .zip(&weighted_grad)
            .map(|(yi, si)| (kk + 1.0) / (kk + 3.0) * yi + 2.0 / (kk + 3.0) * step * si)
            .collect();
        let at_y = smoothed_dual(problem, &y, c, tol)?;
        state = assemble(x_avg.clone(), y, at_y.value, at_y.minimizers, j + 1)?;
        at_u = smoothed_dual(problem, &u, c, tol)?;
        tracker.observe(problem, &state.x_bar, &state.y_bar);
        let mut rec = solver.record_for_baseline(&state, &tracker, started);
        rec.time_ms = solver.timestamp(started);
        trace.records.push(rec);
    };
    Ok(RunResult {
        state,
        trace,
        stop_reason,
    })
}
