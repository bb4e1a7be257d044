//! Normality of the cycle statistics `C_k` under the null, planted and
//! pair-planted laws.

use sbp_core::{
    cycles::{bruteforce_max_k, CycleStats, K_FAST},
    model::{sample_matrix, ModelParams, Overlap},
    planted::{sample_planted, sample_planted_pair},
    stats::{mean_check, mean_variance_check, variance_check, wick_joint_moments, TestVerdict},
};

use super::{model_params, not_evaluated, replica_err, replica_header, rng, timed, ExperimentOutput, MIN_MOMENT_BATCH};
use crate::{
    config::{ExperimentConfig, Measure},
    error::{LabError, Result},
    record::Record,
    runner::replicate,
};

pub const MEAN_SE_MULT: f64 = 3.0;
pub const VAR_BAND: f64 = 0.15;
pub const WICK_DEGREE: u32 = 4;
pub const WICK_Z: f64 = 4.0;

/// Predicted `E C_k`: `0`, `(2β_n)^k` or `2(2β_n)^k`.
pub fn predicted_mean(measure: Measure, beta_n: f64, k: usize) -> f64 {
    let base = (2.0 * beta_n).powi(k as i32);
    match measure {
        Measure::Null => 0.0,
        Measure::Planted => base,
        Measure::Pair => 2.0 * base,
    }
}

fn check_size(config: &ExperimentConfig, n: usize, m: usize) -> Result<()> {
    if config.m1 > K_FAST && config.m1 > bruteforce_max_k(n.max(m)) {
        return Err(LabError::Precondition(format!(
            "C_{} is unavailable at n = {n}, m = {m} (fast path up to k = {K_FAST})",
            config.m1
        )));
    }
    Ok(())
}

fn sample(
    config: &ExperimentConfig,
    params: &ModelParams,
    overlap: Option<Overlap>,
    grid: usize,
    r: usize,
) -> Result<(Vec<f64>, Record)> {
    timed(config, || {
        let rng = &mut rng(config, grid, r);
        let mut rec = replica_header(config, grid, r);
        rec.put_int("n", params.n as u64)
            .put_int("m", params.m as u64)
            .put_text("measure", config.measure.name());
        let g = match (config.measure, overlap) {
            (Measure::Null, _) => sample_matrix(params, rng),
            (Measure::Planted, _) => {
                let inst = sample_planted(params, rng).map_err(replica_err(r))?;
                rec.put_real("accept_rate", inst.accept_stats.acceptance_rate());
                inst.matrix
            }
            (Measure::Pair, Some(o)) => {
                let inst = sample_planted_pair(params, o, rng).map_err(replica_err(r))?;
                rec.put_int("overlap", o.0)
                    .put_real("accept_rate", inst.accept_stats.acceptance_rate());
                inst.matrix
            }
            (Measure::Pair, None) => unreachable!("pair overlap is validated before sampling"),
        };
        let stats = CycleStats::compute(&g, config.m1).map_err(replica_err(r))?;
        let values: Vec<f64> = (2..=config.m1)
            .map(|k| stats.c(k).expect("sizes are checked before sampling"))
            .collect();
        for (k, v) in (2..).zip(&values) {
            rec.put_real(&format!("c{k}"), *v);
        }
        Ok((values, rec))
    })
}

fn verdicts_for(config: &ExperimentConfig, params: &ModelParams, rows: &[Vec<f64>], overlap: Option<Overlap>) -> Result<Vec<TestVerdict>> {
    let beta_n = params.discrete()?.beta_n;
    let measure = config.measure;
    let tag = match overlap {
        Some(o) => format!("{measure}(o={}),n={},m={}", o.0, params.n, params.m),
        None => format!("{measure},n={},m={}", params.n, params.m),
    };
    // The pair prediction is the t = 0 value; other overlaps are reported only.
    let pair_exact = overlap.is_none_or(|o| o.0.abs() <= 1);
    if rows.len() < MIN_MOMENT_BATCH {
        let why = format!("{} replicas; the checks need at least {MIN_MOMENT_BATCH}", rows.len());
        return Ok(vec![not_evaluated(format!("cycle_moments[{tag}]"), why)]);
    }
    let mut out = Vec::new();
    for k in 2..=config.m1 {
        let values: Vec<f64> = rows.iter().map(|r| r[k - 2]).collect();
        let target = predicted_mean(measure, beta_n, k);
        let var_target = 2.0 * k as f64;
        let name = |what: &str| format!("c{k}_{what}[{tag}]");
        match measure {
            Measure::Null => {
                out.push(mean_variance_check(&values, target, var_target, MEAN_SE_MULT, VAR_BAND)?.named(name("mean_variance")));
            }
            Measure::Planted | Measure::Pair => {
                let mean = mean_check(&values, target, MEAN_SE_MULT)?.named(name("mean"));
                out.push(if pair_exact { mean } else { mean.soft() });
                out.push(variance_check(&values, var_target, VAR_BAND)?.named(name("variance")).soft());
            }
        }
    }
    if measure == Measure::Null {
        out.push(wick_joint_moments(rows, WICK_DEGREE, WICK_Z)?.named(format!("wick_joint_moments[{tag}]")).soft());
    }
    Ok(out)
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::default();
    for (grid, &n) in config.n.iter().enumerate() {
        let m = config.density.m_for(n);
        check_size(config, n, m)?;
        let params = model_params(config.kappa, n, m, config.seed, true)?;
        let overlap = match config.measure {
            Measure::Pair => Some(Overlap::new(n, config.overlap).map_err(|e| {
                LabError::Precondition(format!("overlap {} infeasible at n = {n}: {e}", config.overlap))
            })?),
            _ => None,
        };
        let samples = replicate(config.workers, config.replicas, |r| sample(config, &params, overlap, grid, r))?;
        let (rows, recs): (Vec<_>, Vec<_>) = samples.into_iter().unzip();
        out.records.extend(recs);
        out.verdicts.extend(verdicts_for(config, &params, &rows, overlap)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicted_means_scale_with_measure() {
        let b = -0.3;
        assert_eq!(predicted_mean(Measure::Null, b, 3), 0.0);
        assert!((predicted_mean(Measure::Planted, b, 2) - 0.36).abs() < 1e-15);
        assert!((predicted_mean(Measure::Pair, b, 3) + 2.0 * 0.216).abs() < 1e-15);
    }
}
