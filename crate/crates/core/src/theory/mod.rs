//! Constants of the continuous theory and their finite-`n` analogues.
//!
//! All functions here are pure. Quantities that can underflow are
//! evaluated in log space.

mod discrete;
mod overlap;

pub use discrete::{discrete_constants, DiscreteConstants};
pub use overlap::{big_f, hypothesis1_check, q_kappa, q_kappa_prime, FValue, Hypothesis1Report};

#[allow(unused_imports)] // shadowed by std inherent methods when std is in the graph
use num_traits::Float;

use crate::{
    numeric::{self, normal_central_mass, normal_pdf},
    Error, Result,
};

/// Above this value `alpha_c` reports `+∞`.
pub const ALPHA_C_CAP: f64 = 1e300;

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa.is_finite() && kappa > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "kappa must be positive and finite",
            value: kappa,
        })
    }
}

/// `P_κ = P(|N| ≤ κ)` for a standard normal `N`.
pub fn p_kappa(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    Ok(normal_central_mass(kappa))
}

/// `E[N² | |N| ≤ κ] = 1 − 2κφ(κ)/P_κ`.
pub fn mu2_kappa(kappa: f64) -> Result<f64> {
    let p = p_kappa(kappa)?;
    if kappa < 1e-4 {
        // Series of the closed form; avoids the cancellation in 1 − (…).
        let k2 = kappa * kappa;
        return Ok(k2 / 3.0 - 2.0 * k2 * k2 / 45.0);
    }
    Ok(1.0 - 2.0 * kappa * normal_pdf(kappa) / p)
}

/// The same conditional second moment by adaptive quadrature of its
/// defining integral. Used to cross-check [`mu2_kappa`].
pub fn mu2_kappa_quadrature(kappa: f64) -> Result<f64> {
    let p = p_kappa(kappa)?;
    let upper = kappa.min(40.0);
    let integral = numeric::integrate(|x| x * x * normal_pdf(x), 0.0, upper, 1e-17, 1e-14)?;
    Ok(2.0 * integral / p)
}

/// `β = −(√α/2)(1 − μ_{2,κ})`.
pub fn beta(kappa: f64, alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Domain {
            what: "alpha must be nonnegative",
            value: alpha,
        });
    }
    let mu2 = mu2_kappa(kappa)?;
    Ok(-(alpha.sqrt() / 2.0) * (1.0 - mu2))
}

/// Capacity density `α_c(κ) = −log 2 / log P_κ`.
///
/// `log P_κ` is evaluated without forming `P_κ` near 0 or 1, so the result
/// is never NaN; once it exceeds [`ALPHA_C_CAP`] (around `κ ≈ 38`, where
/// `1 − P_κ` leaves double range) the function returns `+∞`.
pub fn alpha_c(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    let ln_p = numeric::ln_normal_central_mass(kappa);
    if ln_p == 0.0 {
        return Ok(f64::INFINITY);
    }
    let a = -core::f64::consts::LN_2 / ln_p;
    Ok(if a > ALPHA_C_CAP { f64::INFINITY } else { a })
}

/// Lognormal parameters `(μ, σ²)` of the limit law of `Z/E[Z]` as a
/// function of `β`; `σ² = −2μ`.
pub fn lognormal_params_from_beta(beta: f64) -> Result<(f64, f64)> {
    let b2 = beta * beta;
    if b2.is_nan() || 4.0 * b2 >= 1.0 {
        return Err(Error::Domain {
            what: "|beta| must be below 1/2 (alpha below capacity)",
            value: beta,
        });
    }
    let l = (-4.0 * b2).ln_1p();
    let mu = 0.25 * l + b2;
    Ok((mu, -2.0 * mu))
}

/// [`lognormal_params_from_beta`] at `β(κ, α)`, requiring `α < α_c(κ)`.
pub fn lognormal_params(kappa: f64, alpha: f64) -> Result<(f64, f64)> {
    let ac = alpha_c(kappa)?;
    if alpha >= ac {
        return Err(Error::Domain {
            what: "alpha must be below alpha_c(kappa)",
            value: alpha,
        });
    }
    lognormal_params_from_beta(beta(kappa, alpha)?)
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.abs() < 0.5 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "|beta| must be below 1/2",
            value: beta,
        })
    }
}

/// `L(M1) = Σ_{k=2}^{M1} (2β)^{2k}/k`.
pub fn l_sum(m1: usize, beta: f64) -> Result<f64> {
    if m1 < 2 {
        return Err(Error::Domain {
            what: "M1 must be at least 2",
            value: m1 as f64,
        });
    }
    let x = 4.0 * beta * beta;
    let mut power = x;
    let mut sum = 0.0;
    for k in 2..=m1 {
        power *= x;
        sum += power / k as f64;
    }
    Ok(sum)
}

/// `lim_{M1→∞} L(M1) = −log(1 − 4β²) − 4β²`.
pub fn l_limit(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let x = 4.0 * beta * beta;
    Ok(-(-x).ln_1p() - x)
}

/// Bound on `E|Y − Y_{M1}|²`: `(2β)^{2M1}[(1−4β²)^{−2} + (1−|2β|)^{−2}]`.
pub fn truncation_bias_bound(m1: usize, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let two_b = 2.0 * beta.abs();
    let lead = two_b.powi(2 * m1 as i32);
    let a = 1.0 - 4.0 * beta * beta;
    let c = 1.0 - two_b;
    Ok(lead * (1.0 / (a * a) + 1.0 / (c * c)))
}

/// Theory constants at one `(κ, α)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants {
    pub kappa: f64,
    pub alpha: f64,
    pub p_kappa: f64,
    pub mu2_kappa: f64,
    pub beta: f64,
    pub alpha_c: f64,
    /// `NaN` when `α ≥ α_c` (the limit law does not exist there).
    pub lognormal_mu: f64,
    pub lognormal_sigma2: f64,
}

impl TheoryConstants {
    pub fn new(kappa: f64, alpha: f64) -> Result<Self> {
        let beta = beta(kappa, alpha)?;
        let (mu, sigma2) = lognormal_params_from_beta(beta).unwrap_or((f64::NAN, f64::NAN));
        Ok(TheoryConstants {
            kappa,
            alpha,
            p_kappa: p_kappa(kappa)?,
            mu2_kappa: mu2_kappa(kappa)?,
            beta,
            alpha_c: alpha_c(kappa)?,
            lognormal_mu: mu,
            lognormal_sigma2: sigma2,
        })
    }
}
