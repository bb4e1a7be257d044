//! Dispatch, replica parallelism and run outputs.

use std::{
    fs,
    path::{Path, PathBuf},
    time::Instant,
};

use rayon::prelude::*;
use sbp_core::stats::TestVerdict;
use serde_json::{json, Value};

use crate::{
    config::{ExperimentConfig, ExperimentKind, OutputFormat},
    error::{LabError, Result},
    experiments::{self, ExperimentOutput},
    record::{self, real, stamped, verdict_record, Record, SCHEMA_VERSION},
};

/// Runs `f(0..count)` on `workers` threads and returns the results in index
/// order. The first error by index wins, so failures are reproducible too.
pub fn replicate<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| LabError::Pool(e.to_string()))?;
    let results: Vec<Result<T>> = pool.install(|| (0..count).into_par_iter().map(&f).collect());
    results.into_iter().collect()
}

/// Records and verdicts of one run, stamped with the config hash.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub records: Vec<Record>,
    pub verdicts: Vec<TestVerdict>,
    pub notes: Vec<String>,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn hard_failures(&self) -> impl Iterator<Item = &TestVerdict> {
        self.verdicts.iter().filter(|v| v.hard && !v.pass)
    }

    /// Exit criterion of a run: every hard verdict passes.
    pub fn passed(&self) -> bool {
        self.hard_failures().next().is_none()
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    let out: ExperimentOutput = match config.experiment {
        ExperimentKind::Lognormal => experiments::partition::run_lognormal(config)?,
        ExperimentKind::Convinp => experiments::partition::run_convinp(config)?,
        ExperimentKind::Cycles => experiments::cycles::run(config)?,
        ExperimentKind::Threshold => experiments::threshold::run(config)?,
        ExperimentKind::Freezing => experiments::freezing::run(config)?,
        ExperimentKind::Contiguity => experiments::contiguity::run(config)?,
        ExperimentKind::Hypothesis => experiments::theory::run_hypothesis(config)?,
        ExperimentKind::Constants => experiments::theory::run_constants(config)?,
    };
    let hash = config.hash();
    Ok(RunReport {
        config: config.clone(),
        records: out
            .records
            .into_iter()
            .map(|r| stamped(&hash, "replica", r))
            .collect(),
        config_hash: hash,
        verdicts: out.verdicts,
        notes: out.notes,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPaths {
    pub records: PathBuf,
    pub verdicts: PathBuf,
    pub summary: PathBuf,
    pub meta: PathBuf,
}

/// Writes records (JSONL or CSV per `format`), `verdicts.jsonl`,
/// `summary.csv` and `run-meta.json` under the configured directory,
/// creating it when missing.
pub fn write_outputs(report: &RunReport) -> Result<OutputPaths> {
    let dir: &Path = &report.config.out;
    fs::create_dir_all(dir).map_err(LabError::io("cannot create output directory", dir))?;
    let paths = OutputPaths {
        records: dir.join(match report.config.format {
            OutputFormat::Jsonl => "records.jsonl",
            OutputFormat::Csv => "records.csv",
        }),
        verdicts: dir.join("verdicts.jsonl"),
        summary: dir.join("summary.csv"),
        meta: dir.join("run-meta.json"),
    };
    match report.config.format {
        OutputFormat::Jsonl => record::write_jsonl(&paths.records, &report.records)?,
        OutputFormat::Csv => record::write_csv(&paths.records, &report.records)?,
    }
    let verdicts: Vec<Record> = report.verdicts.iter().map(verdict_record).collect();
    let stamped_verdicts: Vec<Record> = verdicts
        .iter()
        .map(|v| stamped(&report.config_hash, "verdict", v.clone()))
        .collect();
    record::write_jsonl(&paths.verdicts, &stamped_verdicts)?;
    record::write_csv(&paths.summary, &verdicts)?;
    let meta = json!({
        "schema": SCHEMA_VERSION,
        "config_hash": report.config_hash,
        "experiment": report.config.experiment.name(),
        "lab_version": env!("CARGO_PKG_VERSION"),
        "record_format": report.config.format.name(),
        "workers": report.config.workers,
        "records": report.records.len(),
        "verdicts": report.verdicts.len(),
        "hard_failures": report.hard_failures().count(),
        "wall_time_s": real(report.wall_time_s),
        "notes": report.notes,
        "config": report.config.to_text(),
    });
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n";
    fs::write(&paths.meta, text).map_err(LabError::io("cannot write", &paths.meta))?;
    Ok(paths)
}

/// Human-readable verdict table for the terminal.
pub fn render_verdicts(verdicts: &[TestVerdict]) -> String {
    let mut out = String::new();
    for v in verdicts {
        let status = match (v.pass, v.hard) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "WARN",
        };
        let kind = if v.hard { "hard" } else { "soft" };
        out.push_str(&format!(
            "[{status}] {} ({kind}): statistic {:.6e} threshold {:.6e}; {}\n",
            v.test, v.statistic, v.threshold, v.details
        ));
    }
    out
}

/// Value of `run-meta.json` for tests and tooling.
pub fn read_meta(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(LabError::io("cannot read", path))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| LabError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        reason: e.to_string(),
    })?;
    match v.get("schema").and_then(Value::as_u64) {
        Some(SCHEMA_VERSION) => Ok(v),
        _ => Err(LabError::Schema {
            found: v.get("schema").map_or("missing".into(), Value::to_string),
            expected: SCHEMA_VERSION,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replicate_preserves_order_across_worker_counts() {
        let f = |i: usize| Ok(i * i);
        let one = replicate(1, 50, f).unwrap();
        assert_eq!(one, replicate(4, 50, f).unwrap());
        assert_eq!(one[7], 49);
    }

    #[test]
    fn replicate_reports_first_error_by_index() {
        let err = replicate(3, 20, |i| {
            if i % 5 == 3 {
                Err(LabError::Precondition(format!("bad {i}")))
            } else {
                Ok(i)
            }
        })
        .unwrap_err();
        assert_eq!(err.to_string(), "precondition: bad 3");
    }
}
