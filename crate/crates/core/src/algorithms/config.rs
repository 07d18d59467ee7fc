use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::schedule::TauRule;
use crate::error::{Error, Result};
use crate::inner::DEFAULT_INNER_TOLERANCE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Primal update with simultaneous decrease of both smoothness parameters.
    Alg1,
    /// Alternating primal/dual steps, dual initialization.
    Alg2,
    /// Alternating steps with the roles exchanged and primal initialization.
    #[serde(rename = "alg2sym")]
    Alg2Symmetric,
    /// Dual scheme for strongly convex objectives.
    Alg3,
    /// Accelerated gradient ascent on a fixed-smoothness dual.
    Baseline,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Alg1,
        Algorithm::Alg2,
        Algorithm::Alg2Symmetric,
        Algorithm::Alg3,
        Algorithm::Baseline,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Alg1 => "alg1",
            Algorithm::Alg2 => "alg2",
            Algorithm::Alg2Symmetric => "alg2sym",
            Algorithm::Alg3 => "alg3",
            Algorithm::Baseline => "baseline",
        }
    }

    /// Default `tau_0`.
    pub fn default_tau0(&self) -> f64 {
        match self {
            Algorithm::Alg1 => 0.499,
            Algorithm::Alg2 | Algorithm::Alg2Symmetric => 0.998,
            Algorithm::Alg3 => 0.5,
            Algorithm::Baseline => 0.0,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}' (expected alg1, alg2, alg2sym, alg3 or baseline)")))
    }
}

/// What to do when a step's sufficient condition on `(beta1, beta2, tau)` fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulePolicy {
    /// Abort with [`Error::Schedule`].
    Enforce,
    /// Keep going; the trace records the violation.
    Record,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// `None` picks the algorithm's default.
    pub tau0: Option<f64>,
    pub tau_rule: TauRule,
    /// Initial smoothness `beta1^0 = beta2^0`; `None` picks `sqrt(L_bar_M)`.
    pub beta0: Option<f64>,
    pub eps_p: f64,
    pub eps_d: f64,
    pub eps_phi: f64,
    pub omega: f64,
    pub max_iter: usize,
    pub inner_tolerance: f64,
    /// Abort on an excessive-gap violation instead of only recording it.
    pub check_invariant: bool,
    /// When false the run lasts exactly `max_iter` iterations.
    pub stopping: bool,
    pub schedule_policy: SchedulePolicy,
    /// Per-component overrides `c_i` with `L_i^psi(beta2) = c_i / beta2`.
    pub psi_constants: Option<Vec<f64>>,
    /// Objective value the baseline must reach before stopping.
    pub baseline_target: Option<f64>,
    /// Fill the trace's wall-clock column (otherwise it is written as 0 so
    /// traces are reproducible byte for byte).
    pub wall_clock: bool,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        SolverConfig {
            algorithm,
            tau0: None,
            tau_rule: TauRule::Tightest,
            beta0: None,
            eps_p: 1e-2,
            eps_d: 1e-1,
            eps_phi: 1e-5,
            omega: 1e-3,
            max_iter: 10_000,
            inner_tolerance: DEFAULT_INNER_TOLERANCE,
            check_invariant: false,
            stopping: true,
            schedule_policy: match algorithm {
                Algorithm::Alg2 | Algorithm::Alg2Symmetric => SchedulePolicy::Record,
                _ => SchedulePolicy::Enforce,
            },
            psi_constants: None,
            baseline_target: None,
            wall_clock: false,
        }
    }

    /// Fixed iteration budget with stopping disabled and the invariant enforced.
    pub fn fixed_iterations(algorithm: Algorithm, iterations: usize) -> Self {
        SolverConfig {
            max_iter: iterations,
            stopping: false,
            check_invariant: true,
            ..SolverConfig::new(algorithm)
        }
    }

    pub fn effective_tau0(&self) -> f64 {
        self.tau_rule
            .initial()
            .or(self.tau0)
            .unwrap_or_else(|| self.algorithm.default_tau0())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.tau_rule.validate().map_err(Error::Config)?;
        let tau0 = self.effective_tau0();
        match self.algorithm {
            Algorithm::Alg1 if !(tau0 > 0.0 && tau0 < 0.5) => {
                return bad(format!("alg1 needs tau0 in (0, 1/2), got {tau0}"));
            }
            Algorithm::Alg2 | Algorithm::Alg2Symmetric | Algorithm::Alg3 if !(tau0 > 0.0 && tau0 < 1.0) => {
                return bad(format!("{} needs tau0 in (0, 1), got {tau0}", self.algorithm));
            }
            _ => {}
        }
        if matches!(self.tau_rule, TauRule::Harmonic { .. }) && self.algorithm != Algorithm::Alg1 {
            return bad("the harmonic tau rule applies to alg1 only".into());
        }
        if matches!(self.tau_rule, TauRule::Shifted { .. })
            && !matches!(self.algorithm, Algorithm::Alg2 | Algorithm::Alg2Symmetric)
        {
            return bad("the shifted tau rule applies to alg2 only".into());
        }
        for (name, v) in [
            ("eps_p", self.eps_p),
            ("eps_d", self.eps_d),
            ("eps_phi", self.eps_phi),
            ("omega", self.omega),
            ("inner_tolerance", self.inner_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if let Some(b) = self.beta0 {
            if !(b > 0.0 && b.is_finite()) {
                return bad(format!("beta0 must be positive, got {b}"));
            }
        }
        if let Some(c) = &self.psi_constants {
            if c.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return bad("psi constants must be positive".into());
            }
        }
        Ok(())
    }
}
