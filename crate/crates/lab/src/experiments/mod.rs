//! One module per experiment. Each returns unstamped per-replica records
//! and its verdicts; [`crate::runner`] adds the header fields and writes
//! the outputs.
//!
//! Replica `r` of grid point `g` draws from
//! `replica_rng(seed, (g << 32) | r)`, so a record depends only on the
//! config, the seed and its own coordinates.

pub mod contiguity;
pub mod cycles;
pub mod freezing;
pub mod partition;
pub mod theory;
pub mod threshold;

use std::time::Instant;

use sbp_core::{
    model::{ModelParams, N_MAX},
    seed::{replica_rng, ReplicaRng},
    stats::TestVerdict,
    theory::alpha_c,
    Kappa,
};

use crate::{
    config::ExperimentConfig,
    error::{LabError, Result},
    record::Record,
};

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub records: Vec<Record>,
    pub verdicts: Vec<TestVerdict>,
    pub notes: Vec<String>,
}

pub(crate) fn stream(grid: usize, replica: usize) -> u64 {
    ((grid as u64) << 32) | replica as u64
}

pub(crate) fn rng(config: &ExperimentConfig, grid: usize, replica: usize) -> ReplicaRng {
    replica_rng(config.seed, stream(grid, replica))
}

/// Coordinates every replica record starts with.
pub(crate) fn replica_header(config: &ExperimentConfig, grid: usize, replica: usize) -> Record {
    let mut r = Record::new();
    r.put_int("replica", replica as u64)
        .put_int("seed", config.seed)
        .put_int("stream", stream(grid, replica));
    r
}

/// Runs `body` and, when the config asks for it, appends `elapsed_s`.
pub(crate) fn timed<T>(config: &ExperimentConfig, body: impl FnOnce() -> Result<(T, Record)>) -> Result<(T, Record)> {
    let start = Instant::now();
    let (value, mut record) = body()?;
    if config.timings {
        record.put_real("elapsed_s", start.elapsed().as_secs_f64());
    }
    Ok((value, record))
}

pub(crate) fn replica_err(replica: usize) -> impl FnOnce(sbp_core::Error) -> LabError {
    move |source| LabError::Replica { replica, source }
}

pub(crate) fn verdict(
    test: impl Into<String>,
    statistic: f64,
    threshold: f64,
    band: f64,
    pass: bool,
    hard: bool,
    details: impl Into<String>,
) -> TestVerdict {
    TestVerdict {
        test: test.into(),
        statistic,
        threshold,
        p_value_or_band: band,
        pass,
        hard,
        details: details.into(),
    }
}

/// Hard failing verdict for a check that could not be evaluated.
/// Shortest batch `mean_variance_check` accepts.
pub const MIN_MOMENT_BATCH: usize = 30;

pub(crate) fn not_evaluated(test: impl Into<String>, why: impl Into<String>) -> TestVerdict {
    verdict(test, f64::NAN, f64::NAN, f64::NAN, false, true, why)
}

pub(crate) fn require_counting(n: usize) -> Result<()> {
    if n > N_MAX {
        return Err(LabError::Precondition(format!("n = {n} exceeds the counting limit {N_MAX}")));
    }
    Ok(())
}

/// Model parameters at `(κ, n, m)`, requiring `α = m/n < α_c(κ)` when
/// `below_capacity` is set.
pub(crate) fn model_params(kappa: Kappa, n: usize, m: usize, seed: u64, below_capacity: bool) -> Result<ModelParams> {
    if below_capacity {
        let ac = alpha_c(kappa.value())?;
        let alpha = m as f64 / n as f64;
        if alpha >= ac {
            return Err(LabError::Precondition(format!(
                "alpha = {alpha} (n = {n}, m = {m}) is not below alpha_c({kappa}) = {ac}"
            )));
        }
    }
    if m == 0 {
        return Err(LabError::Precondition(format!("density gives m = 0 rows at n = {n}")));
    }
    Ok(ModelParams::new(kappa, n, m, seed)?)
}

/// `(p̂, SE)` of a Bernoulli sample.
pub(crate) fn proportion(hits: usize, total: usize) -> (f64, f64) {
    let p = hits as f64 / total as f64;
    (p, (p * (1.0 - p) / total as f64).sqrt())
}

/// Wilson score interval at `z` standard errors.
pub(crate) fn wilson(hits: usize, total: usize, z: f64) -> (f64, f64) {
    let nf = total as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * nf)) / (1.0 + z2 / nf);
    let half = z / (1.0 + z2 / nf) * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}
