//! Sample statistics and pass/fail verdicts.
//!
//! Every function is a deterministic function of its input batch.

use alloc::{format, string::String, vec::Vec};

#[allow(unused_imports)] // shadowed by std inherent methods when std is in the graph
use num_traits::Float;

use crate::{numeric::normal_cdf, Error, Result};

/// Terms of the Kolmogorov series.
pub const KS_SERIES_TERMS: usize = 100;
/// Below this `λ` the Kolmogorov tail is 1 to double precision.
const KS_LAMBDA_FLOOR: f64 = 0.2;

/// Outcome of one statistical check. `pass` holds iff `statistic` lies
/// within the band described by `threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestVerdict {
    pub test: String,
    pub statistic: f64,
    pub threshold: f64,
    pub p_value_or_band: f64,
    pub pass: bool,
    /// Whether a failure should fail the run.
    pub hard: bool,
    pub details: String,
}

impl TestVerdict {
    pub fn soft(mut self) -> Self {
        self.hard = false;
        self
    }

    pub fn named(mut self, test: impl Into<String>) -> Self {
        self.test = test.into();
        self
    }
}

/// Mean and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub count: usize,
}

impl MeanEstimate {
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let (mut count, mut mean, mut m2) = (0usize, 0.0, 0.0);
        for v in values {
            count += 1;
            let delta = v - mean;
            mean += delta / count as f64;
            m2 += delta * (v - mean);
        }
        let var = if count > 1 { m2 / (count - 1) as f64 } else { 0.0 };
        MeanEstimate {
            mean,
            std_err: (var / count as f64).sqrt(),
            count,
        }
    }

    /// `|mean − target|` in standard errors.
    pub fn z(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.std_err
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance.
pub fn variance(values: &[f64]) -> f64 {
    let mu = mean(values);
    values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (values.len() - 1) as f64
}

fn check_batch(values: &[f64], min_len: usize) -> Result<()> {
    if values.len() < min_len {
        return Err(Error::Precondition("batch too short"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("batch contains non-finite values"));
    }
    Ok(())
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < KS_LAMBDA_FLOOR {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=KS_SERIES_TERMS {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sided one-sample KS statistic `sup |F_N − F|`.
pub fn ks_statistic(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// KS test of positive values against `Lognormal(μ, σ²)`, passing when
/// the asymptotic p-value exceeds `alpha`.
pub fn ks_lognormal(values: &[f64], mu: f64, sigma2: f64, alpha: f64) -> Result<TestVerdict> {
    check_batch(values, 2)?;
    if let Some(&bad) = values.iter().find(|&&v| v <= 0.0) {
        return Err(Error::Domain {
            what: "lognormal KS needs positive values",
            value: bad,
        });
    }
    if sigma2.is_nan() || sigma2 <= 0.0 {
        return Err(Error::Domain {
            what: "sigma2 must be positive",
            value: sigma2,
        });
    }
    let sigma = sigma2.sqrt();
    let d = ks_statistic(values, |x| normal_cdf((x.ln() - mu) / sigma));
    let lambda = (values.len() as f64).sqrt() * d;
    let p = kolmogorov_tail(lambda);
    Ok(TestVerdict {
        test: "ks_lognormal".into(),
        statistic: d,
        threshold: alpha,
        p_value_or_band: p,
        pass: p > alpha,
        hard: true,
        details: format!("N={} mu={mu:.6} sigma2={sigma2:.6} p={p:.4e}", values.len()),
    })
}

/// Sample mean within `se_mult` standard errors of `target`.
pub fn mean_check(values: &[f64], target: f64, se_mult: f64) -> Result<TestVerdict> {
    check_batch(values, 2)?;
    let est = MeanEstimate::from_values(values.iter().copied());
    let z = if est.std_err > 0.0 {
        est.z(target)
    } else if est.mean == target {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(TestVerdict {
        test: "mean".into(),
        statistic: z,
        threshold: se_mult,
        p_value_or_band: est.std_err,
        pass: z <= se_mult,
        hard: true,
        details: format!("mean={:.6e} target={target:.6e} se={:.3e}", est.mean, est.std_err),
    })
}

/// Sample variance within relative `band` of `target`.
pub fn variance_check(values: &[f64], target: f64, band: f64) -> Result<TestVerdict> {
    check_batch(values, 2)?;
    let var = variance(values);
    let rel = (var - target).abs() / target.abs();
    Ok(TestVerdict {
        test: "variance".into(),
        statistic: rel,
        threshold: band,
        p_value_or_band: var,
        pass: rel <= band,
        hard: true,
        details: format!("var={var:.6e} target={target:.6e}"),
    })
}

/// Conjunction of [`mean_check`] and [`variance_check`]. The statistic is the
/// mean z-score; the band field carries the relative variance deviation.
pub fn mean_variance_check(
    values: &[f64],
    target_mean: f64,
    target_var: f64,
    se_mult: f64,
    var_band: f64,
) -> Result<TestVerdict> {
    check_batch(values, 30)?;
    let m = mean_check(values, target_mean, se_mult)?;
    let v = variance_check(values, target_var, var_band)?;
    Ok(TestVerdict {
        test: "mean_variance".into(),
        statistic: m.statistic,
        threshold: se_mult,
        p_value_or_band: v.statistic,
        pass: m.pass && v.pass,
        hard: true,
        details: format!("{}; {} (band {var_band})", m.details, v.details),
    })
}

/// `E[N^d]` for `N ~ N(0, var)`.
fn gaussian_moment(d: u32, var: f64) -> f64 {
    if d % 2 == 1 {
        return 0.0;
    }
    let double_fact: f64 = (1..d).step_by(2).map(|v| v as f64).product();
    double_fact * var.powi(d as i32 / 2)
}

fn multi_indices(dims: usize, max_degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = alloc::vec![0u32; dims];
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == cur.len() {
            if cur.iter().any(|&d| d > 0) {
                out.push(cur.clone());
            }
            return;
        }
        for d in 0..=left {
            cur[pos] = d;
            rec(pos + 1, left - d, cur, out);
        }
        cur[pos] = 0;
    }
    rec(0, max_degree, &mut cur, &mut out);
    out
}

/// Compares mixed moments of `(C_2, …, C_K)` up to total degree
/// `max_degree` with those of independent centred Gaussians of variance
/// `2k`. `rows[r]` holds `C_2..C_K` of replica `r`. Passes when the worst
/// z-score is at most `z_threshold`.
pub fn wick_joint_moments(rows: &[Vec<f64>], max_degree: u32, z_threshold: f64) -> Result<TestVerdict> {
    if rows.len() < 2 {
        return Err(Error::Precondition("batch too short"));
    }
    let dims = rows[0].len();
    if dims == 0 || rows.iter().any(|r| r.len() != dims) {
        return Err(Error::Precondition("rows must share a nonzero length"));
    }
    let mut worst = 0.0f64;
    let mut worst_at = Vec::new();
    for alpha in multi_indices(dims, max_degree) {
        let target: f64 = alpha
            .iter()
            .enumerate()
            .map(|(d, &a)| gaussian_moment(a, 2.0 * (d + 2) as f64))
            .product();
        let est = MeanEstimate::from_values(rows.iter().map(|r| {
            r.iter().zip(&alpha).map(|(&c, &a)| c.powi(a as i32)).product::<f64>()
        }));
        let z = if est.std_err > 0.0 { est.z(target) } else if est.mean == target { 0.0 } else { f64::INFINITY };
        if z > worst || worst_at.is_empty() {
            worst = worst.max(z);
            worst_at = alpha;
        }
    }
    Ok(TestVerdict {
        test: "wick_joint_moments".into(),
        statistic: worst,
        threshold: z_threshold,
        p_value_or_band: max_degree as f64,
        pass: worst <= z_threshold,
        hard: true,
        details: format!("worst multi-index {worst_at:?} over k=2..{}", dims + 1),
    })
}

/// `Var(L − Y)/Var(L)` for paired log-ratios `L` and corrections `Y`;
/// passes below `threshold`.
pub fn variance_reduction(log_ratio: &[f64], y: &[f64], threshold: f64) -> Result<TestVerdict> {
    if log_ratio.len() != y.len() {
        return Err(Error::Domain {
            what: "log-ratio and correction batches differ in length",
            value: y.len() as f64,
        });
    }
    check_batch(log_ratio, 2)?;
    check_batch(y, 2)?;
    let resid: Vec<f64> = log_ratio.iter().zip(y).map(|(l, c)| l - c).collect();
    let base = variance(log_ratio);
    let rest = variance(&resid);
    let ratio = if base > 0.0 {
        rest / base
    } else if rest == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(TestVerdict {
        test: "variance_reduction".into(),
        statistic: ratio,
        threshold,
        p_value_or_band: base,
        pass: ratio < threshold,
        hard: true,
        details: format!("var(L)={base:.6e} var(L-Y)={rest:.6e}"),
    })
}
