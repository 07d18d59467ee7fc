use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Which update produced an iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Init,
    PrimalMoving,
    Primal,
    Dual,
    StronglyConvexDual,
    Accelerated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub step: StepKind,
    /// `tau_k` used by the step that produced this iterate (0 at initialization).
    pub tau: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub phi: f64,
    /// `d(y; beta1)`, or `d(y)` for the strongly convex scheme.
    pub dual_smoothed: f64,
    /// `phi(x) - d(y; beta1)`.
    pub gap_surrogate: f64,
    /// `f(x; beta2)`.
    pub f_value: f64,
    pub feas_norm: f64,
    pub rpfgap: f64,
    pub rdfgap: f64,
    pub e_d: f64,
    pub e_p: f64,
    /// `d - f`, the excessive-gap margin (negative means violated).
    pub invariant_margin: f64,
    /// Whether the step's sufficient schedule condition held.
    pub schedule_ok: bool,
    pub time_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Feasibility and duality-gap tolerances met.
    Gap,
    /// Feasibility met and the objective stalled.
    Stall,
    /// Baseline: feasibility met and target objective reached.
    Target,
    /// Baseline without a target: feasibility met.
    Feasible,
    MaxIter,
}

impl StopReason {
    pub fn name(&self) -> &'static str {
        match self {
            StopReason::Gap => "gap",
            StopReason::Stall => "stall",
            StopReason::Target => "target",
            StopReason::Feasible => "feasible",
            StopReason::MaxIter => "max_iter",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
}

pub const CSV_HEADER: &str = "k,tau,beta1,beta2,phi,dual_smoothed,gap_surrogate,feas_norm,rpfgap,rdfgap,e_d,e_p,time_ms";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

impl ConvergenceTrace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.records {
            let fields = [
                r.tau,
                r.beta1,
                r.beta2,
                r.phi,
                r.dual_smoothed,
                r.gap_surrogate,
                r.feas_norm,
                r.rpfgap,
                r.rdfgap,
                r.e_d,
                r.e_p,
                r.time_ms,
            ];
            let row: Vec<String> = fields.iter().map(|v| num(*v)).collect();
            writeln!(out, "{},{}", r.k, row.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }

    /// Writes the CSV through a temporary sibling file and renames it into place.
    pub fn write_csv_file(&self, path: &Path) -> io::Result<()> {
        write_atomic(path, self.to_csv_string().as_bytes())
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}
