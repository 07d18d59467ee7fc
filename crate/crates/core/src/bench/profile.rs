//! Ratio-to-best performance profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::manifest::RunSummary;

/// Costs below these floors are raised to them so a zero cost cannot
/// produce an undefined ratio.
const MIN_ITERATIONS: f64 = 1.0;
const MIN_TIME_MS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurves {
    /// Breakpoints in `log2` of the ratio to the best solver, ascending, starting at 0.
    pub thetas: Vec<f64>,
    /// `values[a][t]`: fraction of instances algorithm `a` solved within `2^theta_t` of the best.
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileTable {
    pub algorithms: Vec<String>,
    pub instances: Vec<String>,
    /// `[instance][algorithm]`, `None` for an unsuccessful run.
    pub iterations: Vec<Vec<Option<f64>>>,
    pub time_ms: Vec<Vec<Option<f64>>>,
    pub iteration_profile: ProfileCurves,
    pub time_profile: ProfileCurves,
}

/// Builds both profiles from per-run summaries. A run counts as solved when it
/// stopped on a convergence test (not on the iteration cap) without error.
pub fn performance_profile(results: &[RunSummary]) -> Result<ProfileTable> {
    let mut algorithms: Vec<String> = Vec::new();
    let mut instances: Vec<String> = Vec::new();
    for r in results {
        if !algorithms.contains(&r.algorithm) {
            algorithms.push(r.algorithm.clone());
        }
        if !instances.contains(&r.instance) {
            instances.push(r.instance.clone());
        }
    }
    if algorithms.len() < 2 || instances.len() < 2 {
        return Err(Error::Config(format!(
            "a profile needs at least 2 algorithms and 2 instances, got {} and {}",
            algorithms.len(),
            instances.len()
        )));
    }
    let mut iterations = vec![vec![None; algorithms.len()]; instances.len()];
    let mut time_ms = vec![vec![None; algorithms.len()]; instances.len()];
    for r in results {
        let i = instances.iter().position(|s| *s == r.instance).expect("collected above");
        let a = algorithms.iter().position(|s| *s == r.algorithm).expect("collected above");
        if r.solved() {
            iterations[i][a] = Some((r.iterations as f64).max(MIN_ITERATIONS));
            time_ms[i][a] = Some(r.time_ms.max(MIN_TIME_MS));
        }
    }
    Ok(ProfileTable {
        iteration_profile: profile_curves(&iterations),
        time_profile: profile_curves(&time_ms),
        algorithms,
        instances,
        iterations,
        time_ms,
    })
}

/// Profile curves for a `[instance][algorithm]` cost table (`None` = failure).
pub fn profile_curves(costs: &[Vec<Option<f64>>]) -> ProfileCurves {
    let n_alg = costs.first().map_or(0, Vec::len);
    let log_ratios: Vec<Vec<Option<f64>>> = costs
        .iter()
        .map(|row| {
            let best = row.iter().flatten().copied().fold(f64::INFINITY, f64::min);
            row.iter().map(|c| c.map(|c| (c / best).log2().max(0.0))).collect()
        })
        .collect();
    let mut thetas: Vec<f64> = std::iter::once(0.0)
        .chain(log_ratios.iter().flatten().flatten().copied())
        .collect();
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();
    let n_inst = costs.len().max(1) as f64;
    let values = (0..n_alg)
        .map(|a| {
            thetas
                .iter()
                .map(|&t| {
                    log_ratios
                        .iter()
                        .filter(|row| row[a].is_some_and(|r| r <= t))
                        .count() as f64
                        / n_inst
                })
                .collect()
        })
        .collect();
    ProfileCurves { thetas, values }
}

impl ProfileCurves {
    /// Value of algorithm `a`'s curve at `theta` (step function, right-continuous).
    pub fn at(&self, a: usize, theta: f64) -> f64 {
        let idx = self.thetas.partition_point(|t| *t <= theta);
        if idx == 0 {
            0.0
        } else {
            self.values[a][idx - 1]
        }
    }

    pub fn to_csv(&self, algorithms: &[String]) -> String {
        let mut out = String::from("theta");
        for a in algorithms {
            out.push(',');
            out.push_str(a);
        }
        out.push('\n');
        for (t, theta) in self.thetas.iter().enumerate() {
            out.push_str(&format!("{theta:.16e}"));
            for curve in &self.values {
                out.push_str(&format!(",{:.16e}", curve[t]));
            }
            out.push('\n');
        }
        out
    }
}
