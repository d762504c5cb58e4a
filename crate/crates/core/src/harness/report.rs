//! Report files: `rate_report.csv`, `summary.json` and, when cells fail,
//! `failures.json`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BoundComparison, ExperimentOutcome, ExperimentSpec, RateFit, RatePoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub error: String,
}

impl FailureRecord {
    pub fn from_error(e: &Error) -> Self {
        match e {
            Error::Cell { n, replicate, seed, source } => Self {
                n: *n,
                replicate: *replicate,
                seed: *seed,
                error: source.to_string(),
            },
            other => Self {
                n: 0,
                replicate: 0,
                seed: 0,
                error: other.to_string(),
            },
        }
    }
}

#[derive(Serialize)]
struct CsvRow {
    n: usize,
    replicate: usize,
    excess_randomized: f64,
    excess_mean_estimator: f64,
    bound_rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub pacbayes_core: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Slope of the randomized-classifier column.
    pub slope: Option<f64>,
    pub half_width: Option<f64>,
    pub fit_randomized: Option<RateFit>,
    pub fit_mean_estimator: Option<RateFit>,
    pub points: Vec<RatePoint>,
    pub bound_comparison: Option<BoundComparison>,
    pub guard_flags: Vec<usize>,
    pub cells_ok: usize,
    pub cells_failed: usize,
    pub spec: ExperimentSpec,
    pub versions: Versions,
}

/// Writes the report files into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, spec: &ExperimentSpec, outcome: &ExperimentOutcome) -> Result<Summary> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("rate_report.csv"))?;
    for c in &outcome.cells {
        w.serialize(CsvRow {
            n: c.n,
            replicate: c.replicate,
            excess_randomized: c.excess_randomized,
            excess_mean_estimator: c.excess_mean_estimator,
            bound_rhs: c.bound_rhs,
        })?;
    }
    w.flush()?;
    let r = &outcome.report;
    let summary = Summary {
        slope: r.fit_randomized.map(|f| f.slope),
        half_width: r.fit_randomized.map(|f| f.half_width),
        fit_randomized: r.fit_randomized,
        fit_mean_estimator: r.fit_mean_estimator,
        points: r.points.clone(),
        bound_comparison: r.bound_comparison.clone(),
        guard_flags: r.guard_flags.clone(),
        cells_ok: outcome.cells.len(),
        cells_failed: outcome.failures.len(),
        spec: spec.clone(),
        versions: Versions {
            pacbayes_core: env!("CARGO_PKG_VERSION").to_string(),
        },
    };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    let manifest = dir.join("failures.json");
    if outcome.failures.is_empty() {
        if manifest.exists() {
            fs::remove_file(&manifest)?;
        }
    } else {
        fs::write(manifest, serde_json::to_string_pretty(&outcome.failures)?)?;
    }
    Ok(summary)
}
