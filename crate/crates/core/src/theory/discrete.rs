#[allow(unused_imports)] // shadowed by std inherent methods when std is in the graph
use num_traits::Float;

use crate::{
    numeric::{ln_choose_row, ln_pow2, log_sum_exp},
    Error, Kappa, Result,
};

/// Finite-`n` analogues of `P_κ`, `μ_{2,κ}` and `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteConstants {
    pub n: usize,
    pub m: usize,
    /// `P(|S| ≤ κ√n)` for `S` a sum of `n` Rademacher variables.
    pub p_kappa_n: f64,
    /// `log P_{κ,n}`, kept separately because `P_{κ,n}^m` is formed in log space.
    pub ln_p_kappa_n: f64,
    /// `E[S²/n | |S| ≤ κ√n]`.
    pub mu2_kappa_n: f64,
    /// `−(√m / 2√n)(1 − μ_{2,κ,n})`.
    pub beta_n: f64,
}

/// Exact binomial sums over the admissible row sums `|2t − n| ≤ κ√n`.
///
/// `μ_{2,κ,n}` is the conditional second moment, i.e. the sum over `t`
/// runs over the admissible band only.
pub fn discrete_constants(kappa: &Kappa, n: usize, m: usize) -> Result<DiscreteConstants> {
    if n == 0 || m == 0 {
        return Err(Error::Domain {
            what: "n and m must be positive",
            value: n.min(m) as f64,
        });
    }
    let smax = kappa.max_abs_sum(n) as i64;
    let ln_binom = &ln_choose_row(n as u64);
    let ln_total = ln_pow2(n as u64);
    let admissible = || {
        (0..=n).filter_map(move |t| {
            let s = 2 * t as i64 - n as i64;
            (s.abs() <= smax).then_some((s, ln_binom[t] - ln_total))
        })
    };
    let ln_p = log_sum_exp(admissible().map(|(_, w)| w));
    if ln_p == f64::NEG_INFINITY {
        return Err(Error::Domain {
            what: "band admits no row sum at this n",
            value: n as f64,
        });
    }
    let ln_second = log_sum_exp(
        admissible()
            .filter(|(s, _)| *s != 0)
            .map(|(s, w)| w + 2.0 * (s.abs() as f64).ln()),
    );
    let mu2 = (ln_second - ln_p - (n as f64).ln()).exp();
    let beta_n = -((m as f64).sqrt() / (2.0 * (n as f64).sqrt())) * (1.0 - mu2);
    Ok(DiscreteConstants {
        n,
        m,
        p_kappa_n: ln_p.exp(),
        ln_p_kappa_n: ln_p,
        mu2_kappa_n: mu2,
        beta_n,
    })
}
