//! Small numerical toolbox: normal distribution helpers, log-space
//! binomials, adaptive Gauss–Kronrod quadrature and bisection.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

#[allow(unused_imports)] // shadowed by std inherent methods when std is in the graph
use num_traits::Float;

use crate::{Error, Result};

/// `1/√(2π)`.
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF `Φ(x)`, accurate in both tails.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// `P(|N| ≤ x) = 2Φ(x) − 1`, computed as `erf(x/√2)` so that small `x`
/// keeps full relative precision.
pub fn normal_central_mass(x: f64) -> f64 {
    libm::erf(x * FRAC_1_SQRT_2)
}

/// `log P(|N| ≤ x)` without underflow at either end.
pub fn ln_normal_central_mass(x: f64) -> f64 {
    if x < 1.0 {
        normal_central_mass(x).ln()
    } else {
        (-libm::erfc(x * FRAC_1_SQRT_2)).ln_1p()
    }
}

/// `log C(n, k)`; `-∞` outside `0 ≤ k ≤ n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    let n = n as f64;
    let k = k as f64;
    libm::lgamma(n + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(n - k + 1.0)
}

/// Row of `log C(n, k)` for `k = 0..=n`, accumulated by exact ratios so
/// that neighbouring entries are mutually consistent.
pub fn ln_choose_row(n: u64) -> Vec<f64> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    row.push(0.0);
    for k in 1..=n {
        acc += ((n - k + 1) as f64).ln() - (k as f64).ln();
        row.push(acc);
    }
    // Re-anchor the far half on the mirrored values to cancel drift.
    let len = row.len();
    for k in 0..len / 2 {
        row[len - 1 - k] = row[k];
    }
    row
}

/// `n · log 2`.
pub fn ln_pow2(n: u64) -> f64 {
    n as f64 * LN_2
}

/// Numerically stable `log Σ exp(x_i)`; `-∞` for an empty input.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

// Gauss–Kronrod 7/15 nodes and weights (QUADPACK).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Intervals are bisected until each local error estimate is below its
/// share of `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    const MAX_INTERVALS: usize = 4096;
    if a == b {
        return Ok(0.0);
    }
    let width = b - a;
    let (whole, _) = gk15(&f, a, b);
    let tol = abs_tol.max(rel_tol * whole.abs());
    let mut stack = Vec::with_capacity(64);
    stack.push((a, b));
    let mut total = 0.0;
    let mut evaluated = 0usize;
    while let Some((lo, hi)) = stack.pop() {
        evaluated += 1;
        if evaluated > MAX_INTERVALS {
            return Err(Error::Numeric("adaptive quadrature did not converge"));
        }
        let (value, err) = gk15(&f, lo, hi);
        let share = tol * (hi - lo) / width;
        if err <= share || (hi - lo) <= width * 1e-12 {
            total += value;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi));
            stack.push((lo, mid));
        }
    }
    if !total.is_finite() {
        return Err(Error::Numeric("quadrature produced a non-finite value"));
    }
    Ok(total)
}

/// Bisection on a bracketing interval `[lo, hi]` (`f(lo)` and `f(hi)` of
/// opposite sign) until the bracket is narrower than `x_tol`.
pub fn bisect<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    x_tol: f64,
) -> Result<f64> {
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Numeric("bisection interval does not bracket a root"));
    }
    for _ in 0..200 {
        if hi - lo <= x_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `1/π`, used by the Plackett-form overlap integrals.
pub(crate) const FRAC_1_PI: f64 = 1.0 / PI;
