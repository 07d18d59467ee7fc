use std::time::Instant;

use super::config::{Algorithm, SchedulePolicy, SolverConfig};
use super::schedule::{tau_next_alg1, tau_next_alg2};
use super::stopping::{gap_estimates, rdfgap, stopping_check};
use super::trace::{ConvergenceTrace, StepKind, StopReason, TraceRecord};
use crate::error::{Error, Result};
use crate::linalg::{lerp, lerp_blocks, norm, BlockVector};
use crate::problem::{SeparableProblem, SmoothingConstants};
use crate::smoothing::{
    component_gradient_lipschitz, default_psi_constants, gradient_step, penalty_eval, primal_map, proximal_map,
    smoothed_dual, DiameterTracker, PrimalMapKind, SmoothedDualEval,
};

/// Relative slack of the excessive-gap check.
pub const INVARIANT_SLACK: f64 = 1e-8;

/// Relative tolerance when testing schedule conditions, absorbing rounding in
/// products like `beta1 * beta2`.
const SCHEDULE_RTOL: f64 = 1e-12;

pub fn invariant_slack(dual: f64) -> f64 {
    INVARIANT_SLACK * (1.0 + dual.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub x_bar: BlockVector,
    pub y_bar: Vec<f64>,
    pub beta1: f64,
    pub beta2: f64,
    /// `tau_k`, the step size the next step will use.
    pub tau: f64,
    pub k: usize,
    pub phi: f64,
    /// `f(x_bar; beta2)`.
    pub f_value: f64,
    /// `d(y_bar; beta1)`, or `d(y_bar)` for the strongly convex scheme.
    pub dual_value: f64,
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    /// Minimizers behind `dual_value`, reused by the next primal step.
    pub dual_minimizers: BlockVector,
}

impl IterateState {
    /// `d - f`; negative means the excessive-gap condition fails.
    pub fn invariant_margin(&self) -> f64 {
        self.dual_value - self.f_value
    }

    pub fn invariant_holds(&self) -> bool {
        self.invariant_margin() >= -invariant_slack(self.dual_value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: IterateState,
    pub kind: StepKind,
    pub schedule_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub state: IterateState,
    pub trace: ConvergenceTrace,
    pub stop_reason: StopReason,
}

impl RunResult {
    pub fn iterations(&self) -> usize {
        self.state.k
    }
}

/// A problem bound to a configuration, with the derived constants cached.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    problem: &'a SeparableProblem,
    constants: SmoothingConstants,
    config: SolverConfig,
    psi_constants: Vec<f64>,
    smooth_lipschitz: Vec<Option<f64>>,
    /// `max_i c_i / sigma_i`, the coupling constant of the schedule conditions.
    coupling_max: f64,
}

impl<'a> Solver<'a> {
    pub fn new(problem: &'a SeparableProblem, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let constants = problem.compute_constants()?;
        let psi_constants = match &config.psi_constants {
            Some(c) if c.len() != problem.num_components() => {
                return Err(Error::Config(format!(
                    "{} psi constants given for {} components",
                    c.len(),
                    problem.num_components()
                )));
            }
            Some(c) => c.clone(),
            None => default_psi_constants(&constants),
        };
        let smooth_lipschitz = problem
            .components()
            .iter()
            .enumerate()
            .map(|(i, c)| c.gradient_lipschitz.map(|_| component_gradient_lipschitz(i, c)).transpose())
            .collect::<Result<Vec<_>>>()?;
        let coupling_max = psi_constants
            .iter()
            .zip(&constants.prox_sigma)
            .map(|(c, s)| c / s)
            .fold(0.0, f64::max);
        if config.algorithm == Algorithm::Alg3 {
            constants.smooth_dual_grad_lipschitz()?;
        }
        Ok(Solver {
            problem,
            constants,
            config,
            psi_constants,
            smooth_lipschitz,
            coupling_max,
        })
    }

    pub fn problem(&self) -> &SeparableProblem {
        self.problem
    }

    pub fn constants(&self) -> &SmoothingConstants {
        &self.constants
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn tol(&self) -> f64 {
        self.config.inner_tolerance
    }

    fn initial_beta(&self) -> Result<f64> {
        if let Some(b) = self.config.beta0 {
            return Ok(b);
        }
        Ok(match self.config.algorithm {
            Algorithm::Alg3 => self.constants.smooth_dual_grad_lipschitz()?,
            _ => self.constants.lbar.sqrt(),
        })
    }

    fn dual_eval(&self, y: &[f64], beta1: f64) -> Result<SmoothedDualEval> {
        smoothed_dual(self.problem, y, beta1, self.tol())
    }

    /// Completes a state from its iterates and parameters.
    fn assemble(
        &self,
        x_bar: BlockVector,
        y_bar: Vec<f64>,
        beta1: f64,
        beta2: f64,
        tau: f64,
        k: usize,
    ) -> Result<IterateState> {
        let dual = self.dual_eval(&y_bar, beta1)?;
        let pen = penalty_eval(self.problem, &x_bar, beta2)?;
        Ok(IterateState {
            residual_norm: norm(&pen.residual),
            residual: pen.residual,
            phi: pen.phi_value,
            f_value: pen.f_value,
            dual_value: dual.value,
            dual_minimizers: dual.minimizers,
            x_bar,
            y_bar,
            beta1,
            beta2,
            tau,
            k,
        })
    }

    /// Starting pair and parameters for the configured algorithm, with the
    /// excessive-gap condition verified.
    pub fn initial_state(&self) -> Result<IterateState> {
        let beta = self.initial_beta()?;
        let tau0 = self.config.effective_tau0();
        let tol = self.tol();
        let (x, y, beta1, beta2) = match self.config.algorithm {
            Algorithm::Alg1 | Algorithm::Alg2Symmetric => {
                let (x, y) = initial_point_primal(self.problem, &self.constants, beta, tol)?;
                (x, y, beta, beta)
            }
            Algorithm::Alg2 | Algorithm::Baseline => {
                let (x, y) = initial_point_dual(self.problem, &self.constants, beta, tol)?;
                (x, y, beta, beta)
            }
            Algorithm::Alg3 => {
                let (x, y) = initial_point_strongly_convex(self.problem, &self.constants, tol)?;
                (x, y, 0.0, beta)
            }
        };
        let state = self.assemble(x, y, beta1, beta2, tau0, 0)?;
        if !state.invariant_holds() {
            return Err(invariant_error(&state));
        }
        Ok(state)
    }

    fn check_schedule(&self, iteration: usize, rule: &'static str, lhs: f64, rhs: f64) -> Result<bool> {
        let ok = lhs >= rhs * (1.0 - SCHEDULE_RTOL);
        if !ok && self.config.schedule_policy == SchedulePolicy::Enforce {
            return Err(Error::Schedule {
                iteration,
                rule,
                lhs,
                rhs,
            });
        }
        Ok(ok)
    }

    /// Per-component choice between the gradient and proximal map: the gradient
    /// map is used where it is available and `(1-tau) beta1 sigma_i / tau^2 >=
    /// L_phi_i + c_i / beta2` holds.
    fn primal_kinds(&self, tau: f64, beta1: f64, beta2_map: f64) -> (Vec<PrimalMapKind>, Vec<f64>) {
        let mut kinds = Vec::with_capacity(self.problem.num_components());
        let mut lips = Vec::with_capacity(self.problem.num_components());
        for (i, l) in self.smooth_lipschitz.iter().enumerate() {
            match l {
                Some(l)
                    if (1.0 - tau) * beta1 * self.constants.prox_sigma[i] / (tau * tau)
                        >= l + self.psi_constants[i] / beta2_map =>
                {
                    kinds.push(PrimalMapKind::Gradient);
                    lips.push(*l);
                }
                _ => {
                    kinds.push(PrimalMapKind::Proximal);
                    lips.push(0.0);
                }
            }
        }
        (kinds, lips)
    }

    fn primal_update(
        &self,
        state: &IterateState,
        beta2_map: f64,
    ) -> Result<(BlockVector, Vec<f64>, BlockVector)> {
        let tau = state.tau;
        let x_hat = lerp_blocks(&state.x_bar, &state.dual_minimizers, tau);
        let residual = self.problem.residual(&x_hat);
        let y_star: Vec<f64> = residual.iter().map(|r| r / beta2_map).collect();
        let y_plus = lerp(&state.y_bar, &y_star, tau);
        let (kinds, lips) = self.primal_kinds(tau, state.beta1, beta2_map);
        let x_plus = primal_map(
            self.problem,
            &self.psi_constants,
            &x_hat,
            beta2_map,
            &kinds,
            &lips,
            self.tol(),
        )?;
        Ok((x_plus, y_plus, x_hat))
    }

    /// Primal step with both smoothness parameters decreased.
    pub fn step_apm(&self, state: &IterateState) -> Result<StepOutcome> {
        let tau = state.tau;
        let rhs = tau * tau / ((1.0 - tau) * (1.0 - tau)) * self.coupling_max;
        let schedule_ok = self.check_schedule(state.k, "beta1*beta2 >= tau^2/(1-tau)^2 * Lbar", state.beta1 * state.beta2, rhs)?;
        let beta2 = (1.0 - tau) * state.beta2;
        let (x, y, _) = self.primal_update(state, beta2)?;
        let beta1 = (1.0 - tau) * state.beta1;
        Ok(StepOutcome {
            state: self.assemble(x, y, beta1, beta2, tau, state.k + 1)?,
            kind: StepKind::PrimalMoving,
            schedule_ok,
        })
    }

    fn lemma_condition(&self, state: &IterateState) -> Result<bool> {
        let tau = state.tau;
        let rhs = tau * tau / (1.0 - tau) * self.coupling_max;
        self.check_schedule(state.k, "beta1*beta2 >= tau^2/(1-tau) * Lbar", state.beta1 * state.beta2, rhs)
    }

    /// Primal step with `beta2` held fixed; decreases `beta1`.
    pub fn step_ap(&self, state: &IterateState) -> Result<StepOutcome> {
        let schedule_ok = self.lemma_condition(state)?;
        let (x, y, _) = self.primal_update(state, state.beta2)?;
        let beta1 = (1.0 - state.tau) * state.beta1;
        Ok(StepOutcome {
            state: self.assemble(x, y, beta1, state.beta2, state.tau, state.k + 1)?,
            kind: StepKind::Primal,
            schedule_ok,
        })
    }

    /// Dual step with `beta1` held fixed; decreases `beta2`.
    pub fn step_ad(&self, state: &IterateState) -> Result<StepOutcome> {
        let schedule_ok = self.lemma_condition(state)?;
        let tau = state.tau;
        let y_star: Vec<f64> = state.residual.iter().map(|r| r / state.beta2).collect();
        let y_hat = lerp(&state.y_bar, &y_star, tau);
        let eval = self.dual_eval(&y_hat, state.beta1)?;
        let x = lerp_blocks(&state.x_bar, &eval.minimizers, tau);
        let y = gradient_step(&y_hat, &eval.gradient, 1.0 / self.constants.dual_lipschitz(state.beta1));
        let beta2 = (1.0 - tau) * state.beta2;
        Ok(StepOutcome {
            state: self.assemble(x, y, state.beta1, beta2, tau, state.k + 1)?,
            kind: StepKind::Dual,
            schedule_ok,
        })
    }

    /// Dual step of the strongly convex scheme.
    pub fn step_ads(&self, state: &IterateState) -> Result<StepOutcome> {
        let lphi = self.constants.smooth_dual_grad_lipschitz()?;
        let tau = state.tau;
        let schedule_ok =
            self.check_schedule(state.k, "beta2 >= tau^2 L_phi/(1-tau)", state.beta2, tau * tau * lphi / (1.0 - tau))?;
        let y_star: Vec<f64> = state.residual.iter().map(|r| r / state.beta2).collect();
        let y_hat = lerp(&state.y_bar, &y_star, tau);
        let eval = self.dual_eval(&y_hat, 0.0)?;
        let x = lerp_blocks(&state.x_bar, &eval.minimizers, tau);
        let y = gradient_step(&y_hat, &eval.gradient, 1.0 / lphi);
        let beta2 = (1.0 - tau) * state.beta2;
        Ok(StepOutcome {
            state: self.assemble(x, y, 0.0, beta2, tau, state.k + 1)?,
            kind: StepKind::StronglyConvexDual,
            schedule_ok,
        })
    }

    /// One iteration of the configured algorithm, including the `tau` update.
    pub fn step(&self, state: &IterateState) -> Result<StepOutcome> {
        let even = state.k % 2 == 0;
        let (mut outcome, next): (StepOutcome, fn(f64) -> f64) = match self.config.algorithm {
            Algorithm::Alg1 => (self.step_apm(state)?, tau_next_alg1),
            Algorithm::Alg2 if even => (self.step_ap(state)?, tau_next_alg2),
            Algorithm::Alg2 => (self.step_ad(state)?, tau_next_alg2),
            Algorithm::Alg2Symmetric if even => (self.step_ad(state)?, tau_next_alg2),
            Algorithm::Alg2Symmetric => (self.step_ap(state)?, tau_next_alg2),
            Algorithm::Alg3 => (self.step_ads(state)?, tau_next_alg2),
            Algorithm::Baseline => {
                return Err(Error::Config("the baseline has its own driver".into()));
            }
        };
        outcome.state.tau = self.config.tau_rule.advance(state.tau, state.k, next);
        Ok(outcome)
    }

    fn record(
        &self,
        state: &IterateState,
        step: StepKind,
        tau_used: f64,
        schedule_ok: bool,
        tracker: &DiameterTracker,
        started: Instant,
    ) -> TraceRecord {
        let (diameters, dual_bound) = tracker.estimates(self.config.omega);
        let (e_d, e_p) = gap_estimates(state.beta1, state.beta2, &diameters, dual_bound);
        TraceRecord {
            k: state.k,
            step,
            tau: tau_used,
            beta1: state.beta1,
            beta2: state.beta2,
            phi: state.phi,
            dual_smoothed: state.dual_value,
            gap_surrogate: state.phi - state.dual_value,
            f_value: state.f_value,
            feas_norm: state.residual_norm,
            rpfgap: self.problem.relative_feasibility(state.residual_norm),
            rdfgap: rdfgap(state.beta1, self.constants.sum_diameters(), state.beta2, state.residual_norm),
            e_d,
            e_p,
            invariant_margin: state.invariant_margin(),
            schedule_ok,
            time_ms: if self.config.wall_clock {
                started.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            },
        }
    }

    pub fn run(&self) -> Result<RunResult> {
        if self.config.algorithm == Algorithm::Baseline {
            return super::baseline::run_baseline(self);
        }
        let started = Instant::now();
        let mut state = self.initial_state()?;
        let mut tracker = DiameterTracker::new(self.problem.num_components());
        tracker.observe(self.problem, &state.x_bar, &state.y_bar);
        let mut trace = ConvergenceTrace::default();
        trace
            .records
            .push(self.record(&state, StepKind::Init, 0.0, true, &tracker, started));
        let stop_reason = loop {
            if self.config.stopping {
                if let Some(reason) = stopping_check(&trace, &self.config).reason {
                    break reason;
                }
            }
            if state.k >= self.config.max_iter {
                break StopReason::MaxIter;
            }
            let tau_used = state.tau;
            let outcome = self.step(&state)?;
            state = outcome.state;
            if self.config.check_invariant && !state.invariant_holds() {
                return Err(invariant_error(&state));
            }
            tracker.observe(self.problem, &state.x_bar, &state.y_bar);
            trace.records.push(self.record(
                &state,
                outcome.kind,
                tau_used,
                outcome.schedule_ok,
                &tracker,
                started,
            ));
        };
        Ok(RunResult {
            state,
            trace,
            stop_reason,
        })
    }

    pub(crate) fn record_for_baseline(
        &self,
        state: &IterateState,
        tracker: &DiameterTracker,
        started: Instant,
    ) -> TraceRecord {
        let mut r = self.record(state, StepKind::Accelerated, 0.0, true, tracker, started);
        r.f_value = state.phi;
        r.invariant_margin = f64::NAN;
        r.e_p = 0.0;
        r
    }

    pub(crate) fn timestamp(&self, started: Instant) -> f64 {
        if self.config.wall_clock {
            started.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        }
    }
}

fn invariant_error(state: &IterateState) -> Error {
    Error::Invariant {
        iteration: state.k,
        primal: state.f_value,
        dual: state.dual_value,
        slack: invariant_slack(state.dual_value),
    }
}

/// `y = (A x^c - b) / beta2` and `x = P(x^c; beta2)`.
pub fn initial_point_primal(
    problem: &SeparableProblem,
    constants: &SmoothingConstants,
    beta2: f64,
    tolerance: f64,
) -> Result<(BlockVector, Vec<f64>)> {
    let centers = problem.prox_centers();
    let y = problem.residual(&centers).iter().map(|r| r / beta2).collect();
    let x = proximal_map(problem, constants, &centers, beta2, tolerance)?;
    Ok((x, y))
}

/// `x = x*(0; beta1)` and `y = G(0; beta1)`.
pub fn initial_point_dual(
    problem: &SeparableProblem,
    constants: &SmoothingConstants,
    beta1: f64,
    tolerance: f64,
) -> Result<(BlockVector, Vec<f64>)> {
    let zero = vec![0.0; problem.num_rows()];
    let eval = smoothed_dual(problem, &zero, beta1, tolerance)?;
    let y = gradient_step(&zero, &eval.gradient, 1.0 / constants.dual_lipschitz(beta1));
    Ok((eval.minimizers, y))
}

/// `x = x*(0)` and `y = (A x - b) / L_phi` for strongly convex objectives.
pub fn initial_point_strongly_convex(
    problem: &SeparableProblem,
    constants: &SmoothingConstants,
    tolerance: f64,
) -> Result<(BlockVector, Vec<f64>)> {
    let lphi = constants.smooth_dual_grad_lipschitz()?;
    let zero = vec![0.0; problem.num_rows()];
    let eval = smoothed_dual(problem, &zero, 0.0, tolerance)?;
    let y = gradient_step(&zero, &eval.gradient, 1.0 / lphi);
    Ok((eval.minimizers, y))
}

pub fn run(problem: &SeparableProblem, config: &SolverConfig) -> Result<RunResult> {
    Solver::new(problem, config.clone())?.run()
}
