//! Manifest-driven batches: one trace CSV per run, a summary JSON and, when
//! there is enough data, performance-profile CSVs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{run, write_atomic, Algorithm, RunResult, SolverConfig, StopReason};
use crate::error::{Error, Result};

use super::generators::ProblemSource;
use super::profile::performance_profile;

/// Optional overrides applied on top of each algorithm's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub tau0: Option<f64>,
    pub max_iter: Option<usize>,
    pub eps_p: Option<f64>,
    pub eps_d: Option<f64>,
    pub eps_phi: Option<f64>,
    pub omega: Option<f64>,
    #[serde(default)]
    pub check_invariants: bool,
}

impl ConfigOverrides {
    pub fn apply(&self, algorithm: Algorithm) -> SolverConfig {
        let mut c = SolverConfig::new(algorithm);
        c.tau0 = self.tau0;
        if let Some(v) = self.max_iter {
            c.max_iter = v;
        }
        if let Some(v) = self.eps_p {
            c.eps_p = v;
        }
        if let Some(v) = self.eps_d {
            c.eps_d = v;
        }
        if let Some(v) = self.eps_phi {
            c.eps_phi = v;
        }
        if let Some(v) = self.omega {
            c.omega = v;
        }
        c.check_invariant = self.check_invariants;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// Problem sources: file paths or `gen:` specs (seeds live in the spec).
    pub instances: Vec<String>,
    pub algorithms: Vec<String>,
    #[serde(default)]
    pub overrides: ConfigOverrides,
    /// Used when no output directory is given on the command line.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Algorithm whose final objective becomes the baseline's target on the
    /// same instance. Defaults to `alg1` when it is in the list.
    #[serde(default)]
    pub baseline_target: Option<String>,
}

impl RunManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn parsed_algorithms(&self) -> Result<Vec<Algorithm>> {
        self.algorithms.iter().map(|a| a.parse()).collect()
    }

    fn target_algorithm(&self, algorithms: &[Algorithm]) -> Result<Option<Algorithm>> {
        match &self.baseline_target {
            Some(name) => Ok(Some(name.parse()?)),
            None => Ok(algorithms.contains(&Algorithm::Alg1).then_some(Algorithm::Alg1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub instance: String,
    pub algorithm: String,
    pub iterations: usize,
    /// Stop reason name, or `"error"`.
    pub stop_reason: String,
    pub phi: f64,
    pub feas_norm: f64,
    pub time_ms: f64,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
}

impl RunSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn solved(&self) -> bool {
        self.error.is_none() && self.stop_reason != StopReason::MaxIter.name()
    }

    pub fn from_result(instance: &str, algorithm: Algorithm, seed: Option<u64>, result: &RunResult, time_ms: f64) -> Self {
        RunSummary {
            instance: instance.to_string(),
            algorithm: algorithm.name().to_string(),
            iterations: result.iterations(),
            stop_reason: result.stop_reason.name().to_string(),
            phi: result.state.phi,
            feas_norm: result.state.residual_norm,
            time_ms,
            seed,
            error: None,
            trace: None,
        }
    }

    fn failed(instance: &str, algorithm: &str, seed: Option<u64>, error: &Error) -> Self {
        RunSummary {
            instance: instance.to_string(),
            algorithm: algorithm.to_string(),
            iterations: 0,
            stop_reason: "error".to_string(),
            phi: f64::NAN,
            feas_norm: f64::NAN,
            time_ms: 0.0,
            seed,
            error: Some(error.to_string()),
            trace: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    pub summaries: Vec<RunSummary>,
    pub exit_code: i32,
}

/// File-name-safe form of a problem source.
pub fn instance_slug(instance: &str) -> String {
    let stem = Path::new(instance)
        .file_stem()
        .map_or_else(|| instance.to_string(), |s| s.to_string_lossy().into_owned());
    let base = if instance.starts_with("gen:") { instance } else { &stem };
    base.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// Executes every `(instance, algorithm)` pair of the manifest and writes the
/// outputs into `out_dir`. Instances run concurrently; the algorithms of one
/// instance run in manifest order. Exit code is 1 if any run errored.
pub fn run_command(manifest: &RunManifest, out_dir: &Path) -> Result<BatchOutcome> {
    let names: Vec<String> = manifest.algorithms.clone();
    let algorithms = manifest.parsed_algorithms()?;
    let target_from = manifest.target_algorithm(&algorithms)?;
    std::fs::create_dir_all(out_dir)?;

    let per_instance: Vec<Vec<RunSummary>> = manifest
        .instances
        .par_iter()
        .enumerate()
        .map(|(idx, instance)| run_instance(manifest, idx, instance, &names, &algorithms, target_from, out_dir))
        .collect();
    let summaries: Vec<RunSummary> = per_instance.into_iter().flatten().collect();

    let json = serde_json::to_string_pretty(&summaries)?;
    write_atomic(&out_dir.join("summary.json"), json.as_bytes())?;
    if algorithms.len() >= 2 && manifest.instances.len() >= 2 {
        let table = performance_profile(&summaries)?;
        write_atomic(
            &out_dir.join("profile_iterations.csv"),
            table.iteration_profile.to_csv(&table.algorithms).as_bytes(),
        )?;
        write_atomic(
            &out_dir.join("profile_time.csv"),
            table.time_profile.to_csv(&table.algorithms).as_bytes(),
        )?;
    }
    let exit_code = if summaries.iter().any(|s| s.error.is_some()) { 1 } else { 0 };
    Ok(BatchOutcome { summaries, exit_code })
}

fn run_instance(
    manifest: &RunManifest,
    idx: usize,
    instance: &str,
    names: &[String],
    algorithms: &[Algorithm],
    target_from: Option<Algorithm>,
    out_dir: &Path,
) -> Vec<RunSummary> {
    let source = ProblemSource::parse(instance);
    let seed = source.as_ref().ok().and_then(ProblemSource::seed);
    let problem = source.and_then(|s| s.load());
    let problem = match problem {
        Ok(p) => p,
        Err(e) => return names.iter().map(|a| RunSummary::failed(instance, a, seed, &e)).collect(),
    };

    // Runs whose result feeds the baseline target go first.
    let mut order: Vec<usize> = (0..algorithms.len()).collect();
    order.sort_by_key(|&i| Some(algorithms[i]) != target_from);
    let mut target = None;
    let mut out: Vec<Option<RunSummary>> = vec![None; algorithms.len()];
    for i in order {
        let alg = algorithms[i];
        let mut config = manifest.overrides.apply(alg);
        if alg == Algorithm::Baseline {
            config.baseline_target = target;
        }
        let start = Instant::now();
        let outcome = run(&problem, &config);
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        let summary = match outcome {
            Ok(result) => {
                if Some(alg) == target_from {
                    target = Some(result.state.phi);
                }
                let file = format!("{idx:03}_{}__{}.csv", instance_slug(instance), alg.name());
                let mut s = RunSummary::from_result(instance, alg, seed, &result, elapsed);
                match result.trace.write_csv_file(&out_dir.join(&file)) {
                    Ok(()) => s.trace = Some(file),
                    Err(e) => s.error = Some(Error::from(e).to_string()),
                }
                s
            }
            Err(e) => RunSummary::failed(instance, &names[i], seed, &e),
        };
        out[i] = Some(summary);
    }
    out.into_iter().flatten().collect()
}
