//! JSON reports with provenance, and CSV scaling tables.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    /// Process exit code: 0 pass, 2 fail, 3 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 2,
            Status::Inconclusive => 3,
        }
    }
}

/// One checked number and where its reference value came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: Option<f64>,
    /// Relative tolerance or acceptance window, as text.
    pub tolerance: String,
    /// Monte Carlo or fit uncertainty of `value`.
    pub error: f64,
    pub oracle: String,
    pub status: Status,
}

impl Check {
    pub fn relative(name: &str, value: f64, expected: f64, rel_tol: f64, oracle: &str) -> Self {
        let ok = (value - expected).abs() <= rel_tol * expected.abs();
        Check {
            name: name.into(),
            value,
            expected: Some(expected),
            tolerance: format!("relative {rel_tol:e}"),
            error: 0.0,
            oracle: oracle.into(),
            status: if ok { Status::Pass } else { Status::Fail },
        }
    }

    pub fn window(name: &str, value: f64, error: f64, lo: f64, hi: f64, oracle: &str) -> Self {
        Check {
            name: name.into(),
            value,
            expected: None,
            tolerance: format!("[{lo}, {hi}]"),
            error,
            oracle: oracle.into(),
            status: if value >= lo && value <= hi { Status::Pass } else { Status::Fail },
        }
    }

    pub fn flag(name: &str, ok: bool, oracle: &str) -> Self {
        Check {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            expected: Some(1.0),
            tolerance: "exact".into(),
            error: 0.0,
            oracle: oracle.into(),
            status: if ok { Status::Pass } else { Status::Fail },
        }
    }

    pub fn inconclusive(mut self, noisy: bool) -> Self {
        if noisy && self.status == Status::Pass {
            self.status = Status::Inconclusive;
        }
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub crate_version: String,
    pub command: String,
    pub config: RunConfig,
    pub threads: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub provenance: Provenance,
    pub status: Status,
    pub checks: Vec<Check>,
    pub results: Value,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig, checks: Vec<Check>, results: Value) -> Self {
        let status = checks.iter().map(|c| c.status).max().unwrap_or(Status::Pass);
        Report {
            provenance: Provenance {
                crate_version: env!("CARGO_PKG_VERSION").into(),
                command: command.into(),
                config: config.clone(),
                threads: rayon::current_num_threads(),
            },
            status,
            checks,
            results,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// A row of a scaling table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub scale: f64,
    pub value: f64,
    pub error: f64,
    pub weight: f64,
}

pub fn write_csv(path: &Path, rows: &[ScalingRow]) -> Result<()> {
    let io = |e: csv::Error| Error::Config(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}
