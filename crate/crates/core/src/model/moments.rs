use alloc::vec::Vec;
use core::f64::consts::LN_2;

#[allow(unused_imports)] // shadowed by std inherent methods when std is in the graph
use num_traits::Float;

use super::ModelParams;
use crate::{
    numeric::{ln_choose_row, log_sum_exp},
    Error, Result,
};

/// Inner product `⟨X1, X2⟩ = t√n` of two spin vectors.
///
/// Feasible values satisfy `|o| ≤ n` and `o ≡ n (mod 2)`; the number of
/// agreeing coordinates is then `(n + o)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Overlap(pub i64);

impl Overlap {
    pub fn new(n: usize, value: i64) -> Result<Self> {
        if value.unsigned_abs() > n as u64 || (n as i64 - value).rem_euclid(2) != 0 {
            return Err(Error::Domain {
                what: "overlap must satisfy |o| <= n and o = n (mod 2)",
                value: value as f64,
            });
        }
        Ok(Overlap(value))
    }

    /// Agreement count `a`, so that `o = 2a − n`.
    pub fn from_agreements(n: usize, a: usize) -> Result<Self> {
        Self::new(n, 2 * a as i64 - n as i64)
    }

    /// Feasible overlap nearest to `t√n`, ties toward the smaller value.
    pub fn nearest(n: usize, t: f64) -> Result<Self> {
        let target = t * (n as f64).sqrt();
        let a = ((target + n as f64) / 2.0).round().clamp(0.0, n as f64) as usize;
        Self::from_agreements(n, a)
    }

    pub fn agreements(&self, n: usize) -> usize {
        ((n as i64 + self.0) / 2) as usize
    }

    pub fn t(&self, n: usize) -> f64 {
        self.0 as f64 / (n as f64).sqrt()
    }
}

/// `log E[Z] = n log 2 + m log P_{κ,n}`.
pub fn expected_z(params: &ModelParams) -> Result<f64> {
    let d = params.discrete()?;
    Ok(params.n as f64 * LN_2 + params.m as f64 * d.ln_p_kappa_n)
}

/// Log of the probability that one Rademacher row satisfies the band for
/// both `X1 = 1` and `X2` with `a` leading `+1`s and `n − a` trailing `−1`s.
///
/// Writing `u`, `v` for the row sums over the two blocks, the constraints
/// are `|u + v| ≤ s` and `|u − v| ≤ s`, hence `|u|, |v| ≤ s`.
fn ln_row_pair_prob(n: usize, a: usize, smax: i64, ln_a: &[f64], ln_b: &[f64]) -> f64 {
    let b = n - a;
    let ln_total = n as f64 * LN_2;
    // k ↦ sum of a block of size `len` with `k` minus signs.
    let block = |len: usize| {
        let lo = ((len as i64 - smax).max(0) as u64).div_ceil(2) as usize;
        let hi = ((len as i64 + smax) / 2).min(len as i64) as usize;
        (lo..=hi).map(move |k| (k, len as i64 - 2 * k as i64))
    };
    let mut terms = Vec::new();
    for (k1, u) in block(a) {
        for (k2, v) in block(b) {
            if (u + v).abs() <= smax && (u - v).abs() <= smax {
                terms.push(ln_a[k1] + ln_b[k2] - ln_total);
            }
        }
    }
    log_sum_exp(terms)
}

/// `log P_t`: probability that a Rademacher matrix admits both `X1` and `X2`
/// with `⟨X1, X2⟩ = overlap`.
pub fn pair_prob(params: &ModelParams, overlap: Overlap) -> Result<f64> {
    let n = params.n;
    let o = Overlap::new(n, overlap.0)?;
    let a = o.agreements(n);
    let m = params.m as f64;
    if a == 0 || a == n {
        return Ok(m * params.discrete()?.ln_p_kappa_n);
    }
    let smax = params.kappa.max_abs_sum(n) as i64;
    let ln_a = ln_choose_row(a as u64);
    let ln_b = ln_choose_row((n - a) as u64);
    Ok(m * ln_row_pair_prob(n, a, smax, &ln_a, &ln_b))
}

/// `E[Z²]/E[Z]²`, summing the exact pair probabilities over every overlap.
pub fn second_moment_ratio(params: &ModelParams) -> Result<f64> {
    let n = params.n;
    let m = params.m as f64;
    let ln_p = params.discrete()?.ln_p_kappa_n;
    let smax = params.kappa.max_abs_sum(n) as i64;
    let rows: Vec<Vec<f64>> = (0..=n as u64).map(ln_choose_row).collect();
    let ln_n = &rows[n];
    let ln_total = n as f64 * LN_2;
    let terms = (0..=n).map(|a| {
        let ln_row = if a == 0 || a == n {
            ln_p
        } else {
            ln_row_pair_prob(n, a, smax, &rows[a], &rows[n - a])
        };
        ln_n[a] - ln_total + m * (ln_row - 2.0 * ln_p)
    });
    Ok(log_sum_exp(terms).exp())
}
