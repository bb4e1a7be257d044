//! The overlap function `q_κ(x)`, the exponent `F(x)` of the second
//! moment, and a numerical report on the uniqueness of its critical point.
//!
//! `q_κ(x) = P(|N1| ≤ κ, |N2| ≤ κ)` for standard normals with correlation
//! `ρ = 2x − 1`. Differentiating the rectangle probability in `ρ` only
//! leaves the bivariate density at the four corners (Plackett's identity),
//! which gives closed forms for `q'` and `q''` and reduces `q` itself to a
//! one-dimensional integral with a smooth integrand:
//!
//! ```text
//! q(ρ) = P_κ² + (1/π) ∫_0^{asin|ρ|} [exp(−κ²/(1+sin θ)) − exp(−κ²/(1−sin θ))] dθ
//! ```

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std inherent methods when std is in the graph
use num_traits::Float;

use super::{check_kappa, p_kappa};
use crate::{
    numeric::{self, FRAC_1_PI},
    Error, Result,
};

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "overlap x must lie in [0, 1]",
            value: x,
        })
    }
}

/// `q_κ(x)` to about `1e−14` absolute. Depends on `x` only through
/// `|2x − 1|`, so `q_κ(x) = q_κ(1 − x)` holds exactly.
pub fn q_kappa(x: f64, kappa: f64) -> Result<f64> {
    check_unit(x)?;
    let p = p_kappa(kappa)?;
    if x == 0.0 || x == 1.0 {
        return Ok(p);
    }
    let rho = (2.0 * x - 1.0).abs();
    if rho == 0.0 {
        return Ok(p * p);
    }
    let k2 = kappa * kappa;
    let integrand = |theta: f64| {
        let s = theta.sin();
        let far = if s >= 1.0 { 0.0 } else { (-k2 / (1.0 - s)).exp() };
        (-k2 / (1.0 + s)).exp() - far
    };
    let integral = numeric::integrate(integrand, 0.0, rho.asin(), 1e-16, 1e-14)?;
    Ok((p * p + FRAC_1_PI * integral).min(p))
}

/// `(dq/dx, d²q/dx²)` in closed form, for `0 < x < 1`.
pub fn q_kappa_prime(x: f64, kappa: f64) -> Result<(f64, f64)> {
    check_kappa(kappa)?;
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain {
            what: "derivatives of q need 0 < x < 1",
            value: x,
        });
    }
    let a = 0.5 * kappa * kappa;
    let y = 1.0 - x;
    let e1 = (-a / x).exp();
    let e2 = (-a / y).exp();
    // (a/x²)·e^{−a/x} evaluated in log space to survive x → 0.
    let d1 = (a.ln() - 2.0 * x.ln() - a / x).exp();
    let d2 = (a.ln() - 2.0 * y.ln() - a / y).exp();
    let big_a = e1 - e2;
    let big_a_prime = d1 + d2;
    let r = (x * y).sqrt();
    let first = FRAC_1_PI * big_a / r;
    let second = FRAC_1_PI * (big_a_prime - big_a * (1.0 - 2.0 * x) / (2.0 * x * y)) / r;
    Ok((first, second))
}

/// `F(x)` together with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FValue {
    pub x: f64,
    pub q: f64,
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// `F(x) = α log q_κ(x) − x log x − (1 − x) log(1 − x)` for `0 < x < 1`.
///
/// The derivatives use the closed forms of `q'` and `q''`; the entropy
/// term at `x ∈ {0, 1}` is out of contract.
pub fn big_f(x: f64, kappa: f64, alpha: f64) -> Result<FValue> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain {
            what: "F is evaluated on the open interval (0, 1)",
            value: x,
        });
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Domain {
            what: "alpha must be nonnegative",
            value: alpha,
        });
    }
    let q = q_kappa(x, kappa)?;
    let (q1, q2) = q_kappa_prime(x, kappa)?;
    let y = 1.0 - x;
    let ratio = q1 / q;
    Ok(FValue {
        x,
        q,
        value: alpha * q.ln() - x * x.ln() - y * y.ln(),
        d1: alpha * ratio - x.ln() + y.ln(),
        d2: alpha * (q2 / q - ratio * ratio) - 1.0 / x - 1.0 / y,
    })
}

/// Grid resolution of [`hypothesis1_check`].
pub const HYPOTHESIS_GRID: usize = 2048;
/// Endpoint margin of the scan.
pub const HYPOTHESIS_MARGIN: f64 = 1e-4;

/// Outcome of the numerical uniqueness check for critical points of `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis1Report {
    pub kappa: f64,
    pub alpha: f64,
    pub f2_half: f64,
    /// Located roots of `F'` on `(0, 1/2)`, ascending. Roots on `(1/2, 1)`
    /// are their mirror images.
    pub roots: Vec<f64>,
    /// One of `roots` lies in `(0, ε)` below the scanned grid. It is found
    /// by probing towards 0, using `F'(0⁺) = −∞` whenever `α > 0`.
    pub boundary_root: bool,
}

impl Hypothesis1Report {
    pub fn root_count(&self) -> usize {
        self.roots.len()
    }

    pub fn f2_half_negative(&self) -> bool {
        self.f2_half < 0.0
    }

    /// The situation the hypothesis speaks about: `F''(1/2) < 0` and yet
    /// not exactly one root.
    pub fn deviates(&self) -> bool {
        self.f2_half_negative() && self.root_count() != 1
    }
}

/// Scans `F'` over `[ε, 1/2 − ε]` on a uniform grid, refines every sign
/// change by bisection to `1e−9`, and reports the roots along with the
/// sign of `F''(1/2)`. Nothing is asserted.
pub fn hypothesis1_check(kappa: f64, alpha: f64) -> Result<Hypothesis1Report> {
    check_kappa(kappa)?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Domain {
            what: "alpha must be nonnegative",
            value: alpha,
        });
    }
    let d1 = |x: f64| big_f(x, kappa, alpha).map(|f| f.d1);
    let f2_half = big_f(0.5, kappa, alpha)?.d2;

    let lo = HYPOTHESIS_MARGIN;
    let hi = 0.5 - HYPOTHESIS_MARGIN;
    let step = (hi - lo) / (HYPOTHESIS_GRID - 1) as f64;
    let mut roots = Vec::new();
    let mut boundary_root = false;

    let mut prev_x = lo;
    let mut prev = d1(lo)?;
    if alpha > 0.0 && prev > 0.0 {
        // F' → −∞ at 0⁺, so a sign change hides below the margin.
        let mut probe = lo;
        let mut found = None;
        for _ in 0..300 {
            probe *= 0.1;
            if probe < 1e-300 {
                break;
            }
            if d1(probe)? < 0.0 {
                found = Some(probe);
                break;
            }
        }
        if let Some(p) = found {
            roots.push(numeric::bisect(d1, p, lo, 1e-9 * lo.min(1.0))?);
            boundary_root = true;
        }
    }
    if prev == 0.0 {
        roots.push(lo);
    }
    for i in 1..HYPOTHESIS_GRID {
        let x = if i == HYPOTHESIS_GRID - 1 { hi } else { lo + step * i as f64 };
        let cur = d1(x)?;
        if cur == 0.0 {
            roots.push(x);
        } else if prev != 0.0 && cur.signum() != prev.signum() {
            roots.push(numeric::bisect(d1, prev_x, x, 1e-9)?);
        }
        prev = cur;
        prev_x = x;
    }
    Ok(Hypothesis1Report {
        kappa,
        alpha,
        f2_half,
        roots,
        boundary_root,
    })
}
