//! The excessive-gap decomposition algorithms, their parameter schedules and
//! stopping rules, and the fixed-smoothness baseline.

mod baseline;
mod config;
mod driver;
mod schedule;
mod stopping;
mod trace;

pub use baseline::{baseline_smoothness, run_baseline_fixed};
pub use config::{Algorithm, SchedulePolicy, SolverConfig};
pub use driver::{
    initial_point_dual, initial_point_primal, initial_point_strongly_convex, invariant_slack, run, IterateState,
    RunResult, Solver, StepOutcome, INVARIANT_SLACK,
};
pub use schedule::{
    beta_alg1_closed_form, tau_alg1_closed_form, tau_next_alg1, tau_next_alg2, xi_comparison, TauRule,
};
pub use stopping::{gap_estimates, objective_stalled, rdfgap, stopping_check, StopDecision};
pub use trace::{write_atomic, ConvergenceTrace, StepKind, StopReason, TraceRecord, CSV_HEADER};
