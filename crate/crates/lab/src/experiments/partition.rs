//! Fluctuations of `Z/E[Z]` under the null: the lognormal law and the
//! variance explained by the cycle correction `Y`.

use sbp_core::{
    cycles::{correction_y, BetaConvention, CycleStats},
    model::{count_solutions, expected_z, sample_matrix, ModelParams},
    stats::{ks_lognormal, mean_variance_check, variance, variance_reduction, MeanEstimate, TestVerdict},
    theory::{self, l_sum, lognormal_params_from_beta},
};

use super::{
    model_params, not_evaluated, replica_err, replica_header, require_counting, rng, timed, verdict,
    ExperimentOutput, MIN_MOMENT_BATCH,
};
use crate::{config::ExperimentConfig, error::Result, record::Record, runner::replicate};

pub const KS_ALPHA: f64 = 0.01;
pub const LOG_MEAN_SE_MULT: f64 = 4.0;
pub const LOG_VAR_BAND: f64 = 0.25;
pub const VARIANCE_RATIO_MAX: f64 = 0.35;
/// `|β_n|` below which `Y ≡ 0` to working precision.
pub const NO_SIGNAL_BETA: f64 = 1e-6;
/// Truncation level `M2` in `E[(Z/E[Z]) exp(−Y 1[|Y| ≤ M2])]`.
pub const EXPECT_M2: f64 = 10.0;

/// One `n` of the run.
#[derive(Debug, Clone)]
pub struct Point {
    pub params: ModelParams,
    pub ln_ez: f64,
    pub beta_n: f64,
    /// `β` used in `Y`, per the configured convention.
    pub beta_y: f64,
}

/// Samples of one point, in replica order.
pub type PointSamples = (Point, Vec<Sample>);

#[derive(Debug, Clone)]
pub struct Sample {
    pub z: u64,
    pub log_ratio: f64,
    pub cycles: CycleStats,
}

impl Point {
    fn new(config: &ExperimentConfig, n: usize) -> Result<Self> {
        require_counting(n)?;
        let params = model_params(config.kappa, n, config.density.m_for(n), config.seed, true)?;
        let beta_n = params.discrete()?.beta_n;
        let beta_y = match config.beta {
            BetaConvention::Finite => beta_n,
            BetaConvention::Asymptotic => theory::beta(config.kappa.value(), params.alpha())?,
        };
        Ok(Point {
            ln_ez: expected_z(&params)?,
            params,
            beta_n,
            beta_y,
        })
    }

    /// `Y_{k}` of one sample under the point's convention.
    pub fn y(&self, config: &ExperimentConfig, s: &Sample, m1: usize) -> Option<f64> {
        correction_y(&s.cycles, m1, self.beta_y, config.beta).ok().map(|c| c.y)
    }

    fn tag(&self) -> String {
        format!("n={},m={}", self.params.n, self.params.m)
    }
}

fn sample(config: &ExperimentConfig, point: &Point, grid: usize, r: usize) -> Result<(Sample, Record)> {
    timed(config, || {
        let p = &point.params;
        let g = sample_matrix(p, &mut rng(config, grid, r));
        let z = count_solutions(&g, &p.kappa).map_err(replica_err(r))?.count;
        let log_ratio = (z as f64).ln() - point.ln_ez;
        let cycles = CycleStats::compute(&g, config.m1).map_err(replica_err(r))?;
        let s = Sample { z, log_ratio, cycles };
        let mut rec = replica_header(config, grid, r);
        rec.put_int("n", p.n as u64)
            .put_int("m", p.m as u64)
            .put_int("z", s.z)
            .put_real("log_expected_z", point.ln_ez)
            .put_real("log_ratio", s.log_ratio)
            .put_real("ratio", s.log_ratio.exp());
        for k in 2..=config.m1 {
            rec.put_opt_real(&format!("c{k}"), s.cycles.c(k));
        }
        rec.put_opt_real("y", point.y(config, &s, config.m1));
        Ok((s, rec))
    })
}

/// Samples every configured `n`; shared by both experiments.
pub fn collect(config: &ExperimentConfig) -> Result<(Vec<PointSamples>, Vec<Record>)> {
    let mut points = Vec::new();
    let mut records = Vec::new();
    for (grid, &n) in config.n.iter().enumerate() {
        let point = Point::new(config, n)?;
        let out = replicate(config.workers, config.replicas, |r| sample(config, &point, grid, r))?;
        let (samples, recs): (Vec<_>, Vec<_>) = out.into_iter().unzip();
        records.extend(recs);
        points.push((point, samples));
    }
    Ok((points, records))
}

pub fn lognormal_verdicts(point: &Point, samples: &[Sample]) -> Result<Vec<TestVerdict>> {
    let tag = point.tag();
    let (ks_name, mom_name) = (format!("ks_lognormal[{tag}]"), format!("log_ratio_moments[{tag}]"));
    if point.params.kappa.is_vacuous(point.params.n) {
        let detail = "degenerate: every assignment is a solution, Z = E[Z] in every replica";
        return Ok(vec![
            verdict(ks_name, 0.0, KS_ALPHA, 1.0, true, false, detail),
            verdict(mom_name, 0.0, 0.0, 0.0, true, false, detail),
        ]);
    }
    let zeros = samples.iter().filter(|s| s.z == 0).count();
    if zeros > 0 {
        let why = format!("{zeros} replicas with Z = 0; log-ratio undefined");
        return Ok(vec![not_evaluated(ks_name, why.clone()), not_evaluated(mom_name, why)]);
    }
    if samples.len() < MIN_MOMENT_BATCH {
        let why = format!("{} replicas; the checks need at least {MIN_MOMENT_BATCH}", samples.len());
        return Ok(vec![not_evaluated(ks_name, why.clone()), not_evaluated(mom_name, why)]);
    }
    let (mu, sigma2) = lognormal_params_from_beta(point.beta_n)?;
    let ratios: Vec<f64> = samples.iter().map(|s| s.log_ratio.exp()).collect();
    let logs: Vec<f64> = samples.iter().map(|s| s.log_ratio).collect();
    Ok(vec![
        ks_lognormal(&ratios, mu, sigma2, KS_ALPHA)?.named(ks_name),
        mean_variance_check(&logs, mu, sigma2, LOG_MEAN_SE_MULT, LOG_VAR_BAND)?.named(mom_name),
    ])
}

pub fn run_lognormal(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let (points, records) = collect(config)?;
    let mut out = ExperimentOutput {
        records,
        ..Default::default()
    };
    for (point, samples) in &points {
        out.verdicts.extend(lognormal_verdicts(point, samples)?);
        let (mu, sigma2) = lognormal_params_from_beta(point.beta_n)?;
        out.notes.push(format!(
            "{}: beta_n = {:.6}, lognormal (mu, sigma2) = ({mu:.6}, {sigma2:.6})",
            point.tag(),
            point.beta_n
        ));
    }
    Ok(out)
}

/// `Var(L − Y_k)` for `k = 2..=M1`; `None` where `Y_k` is unavailable.
pub fn residual_variances(config: &ExperimentConfig, point: &Point, samples: &[Sample]) -> Vec<(usize, Option<f64>)> {
    (2..=config.m1)
        .map(|k| {
            let resid: Option<Vec<f64>> = samples
                .iter()
                .map(|s| point.y(config, s, k).map(|y| s.log_ratio - y))
                .collect();
            (k, resid.map(|r| variance(&r)))
        })
        .collect()
}

pub fn convinp_verdicts(config: &ExperimentConfig, point: &Point, samples: &[Sample]) -> Result<Vec<TestVerdict>> {
    let tag = point.tag();
    let m1 = config.m1;
    let mut verdicts = Vec::new();
    if point.beta_y.abs() < NO_SIGNAL_BETA {
        verdicts.push(verdict(
            format!("no_signal[{tag}]"),
            point.beta_y,
            NO_SIGNAL_BETA,
            0.0,
            true,
            false,
            "no-signal regime: beta ~ 0, so Y ~ 0 and Z/E[Z] ~ 1",
        ));
        return Ok(verdicts);
    }
    let vr_name = format!("variance_reduction[{tag},M1={m1}]");
    let mono_name = format!("residual_variance_nonincreasing[{tag}]");
    let zeros = samples.iter().filter(|s| s.z == 0).count();
    if zeros > 0 {
        let why = format!("{zeros} replicas with Z = 0; log-ratio undefined");
        return Ok(vec![not_evaluated(vr_name, why.clone()), not_evaluated(mono_name, why)]);
    }
    let logs: Vec<f64> = samples.iter().map(|s| s.log_ratio).collect();
    let ys: Option<Vec<f64>> = samples.iter().map(|s| point.y(config, s, m1)).collect();
    let Some(ys) = ys else {
        let why = format!("cycle statistics up to M1 = {m1} unavailable at this size");
        return Ok(vec![not_evaluated(vr_name, why.clone()), not_evaluated(mono_name, why)]);
    };
    verdicts.push(variance_reduction(&logs, &ys, VARIANCE_RATIO_MAX)?.named(vr_name));

    let resid = residual_variances(config, point, samples);
    let (first, last) = (resid[0].1.unwrap_or(f64::NAN), resid[resid.len() - 1].1.unwrap_or(f64::NAN));
    let ratio = last / first;
    let listing: Vec<String> = resid
        .iter()
        .map(|(k, v)| format!("M1={k}: {}", v.map_or("n/a".into(), |v| format!("{v:.6e}"))))
        .collect();
    verdicts.push(verdict(
        mono_name,
        ratio,
        1.0,
        f64::NAN,
        ratio <= 1.0,
        true,
        format!("Var(L - Y_M1) on shared seeds, {}", listing.join(", ")),
    ));

    // E[(Z/E[Z]) exp(−Y 1[|Y| ≤ M2])] estimates E*[exp(−Y ...)], bounded
    // below by 1 − exp(−M2²/(2 L(M1))) in the limit.
    let weighted = MeanEstimate::from_values(samples.iter().zip(&ys).map(|(s, &y)| {
        let y = if y.abs() <= EXPECT_M2 { y } else { 0.0 };
        (s.log_ratio - y).exp()
    }));
    let bound = 1.0 - (-EXPECT_M2 * EXPECT_M2 / (2.0 * l_sum(m1, point.beta_y)?)).exp();
    verdicts.push(verdict(
        format!("planted_expectation_bound[{tag},M1={m1}]"),
        weighted.mean,
        bound,
        weighted.std_err,
        weighted.mean + 3.0 * weighted.std_err >= bound,
        false,
        format!("report: E*[exp(-Y)] via null reweighting; se {:.3e}", weighted.std_err),
    ));
    Ok(verdicts)
}

pub fn run_convinp(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let (points, records) = collect(config)?;
    let mut out = ExperimentOutput {
        records,
        ..Default::default()
    };
    for (point, samples) in &points {
        out.verdicts.extend(convinp_verdicts(config, point, samples)?);
    }
    Ok(out)
}
