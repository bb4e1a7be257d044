//! Exact band width `κ` given as a decimal string.
//!
//! Row sums are integers, so the band test `|S| ≤ κ√n` is decided as
//! `S² ≤ ⌊κ²n⌋` with `κ` held as the rational `digits / 10^scale`.

use alloc::{
    format,
    string::{String, ToString},
};
use core::{fmt, str::FromStr};

use crate::{Error, Result};

/// Largest accepted mantissa; keeps `digits² · n` inside `u128` for any
/// `n < 2^32`.
const MAX_DIGITS: u64 = 1_000_000_000_000;

/// Band half-width `κ > 0` as an exact decimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Kappa {
    digits: u64,
    scale: u32,
}

impl Kappa {
    /// `κ = digits / 10^scale`.
    pub fn from_parts(digits: u64, scale: u32) -> Result<Self> {
        if digits == 0 {
            return Err(Error::InvalidKappa {
                input: format!("{digits}e-{scale}"),
                reason: "kappa must be positive",
            });
        }
        if digits >= MAX_DIGITS || scale > 24 {
            return Err(Error::InvalidKappa {
                input: format!("{digits}e-{scale}"),
                reason: "at most 12 significant digits and 24 decimals",
            });
        }
        let mut k = Kappa { digits, scale };
        while k.scale > 0 && k.digits.is_multiple_of(10) {
            k.digits /= 10;
            k.scale -= 1;
        }
        Ok(k)
    }

    /// Closest decimal with at most 12 significant digits.
    pub fn from_f64(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidKappa {
                input: format!("{value}"),
                reason: "kappa must be positive and finite",
            });
        }
        format!("{value:.11e}").parse()
    }

    pub fn value(&self) -> f64 {
        self.digits as f64 / libm::pow(10.0, self.scale as f64)
    }

    /// `⌊κ² n⌋`, the largest admissible squared row sum for `n` variables.
    pub fn band_sq(&self, n: usize) -> u128 {
        let num = (self.digits as u128) * (self.digits as u128) * (n as u128);
        num / 10u128.pow(2 * self.scale)
    }

    /// Largest admissible `|S|`, i.e. `⌊√⌊κ²n⌋⌋`, saturated at `n`.
    pub fn max_abs_sum(&self, n: usize) -> usize {
        let band = self.band_sq(n);
        if band >= (n as u128) * (n as u128) {
            return n;
        }
        isqrt(band) as usize
    }

    /// True when every `S` with `|S| ≤ n` passes, i.e. `κ√n ≥ n`.
    pub fn is_vacuous(&self, n: usize) -> bool {
        self.band_sq(n) >= (n as u128) * (n as u128)
    }

    pub fn admits(&self, row_sum: i64, n: usize) -> bool {
        let s = row_sum.unsigned_abs() as u128;
        s * s <= self.band_sq(n)
    }
}

fn isqrt(v: u128) -> u128 {
    if v < 2 {
        return v;
    }
    let mut x = libm::sqrt(v as f64) as u128;
    while x * x > v {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= v {
        x += 1;
    }
    x
}

impl FromStr for Kappa {
    type Err = Error;

    /// Accepts plain decimals (`"1"`, `"0.6744898"`) and scientific
    /// notation (`"5e1"`, `"6.7448975e-1"`).
    fn from_str(s: &str) -> Result<Self> {
        let invalid = |reason| Error::InvalidKappa {
            input: s.to_string(),
            reason,
        };
        let t = s.trim();
        let (mantissa, exponent) = match t.find(['e', 'E']) {
            Some(pos) => {
                let exp: i32 = t[pos + 1..]
                    .parse()
                    .map_err(|_| invalid("malformed exponent"))?;
                (&t[..pos], exp)
            }
            None => (t, 0),
        };
        let mantissa = mantissa.strip_prefix('+').unwrap_or(mantissa);
        let (int_part, frac_part) = match mantissa.split_once('.') {
            Some((i, f)) => (i, f),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(invalid("empty number"));
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(invalid("expected a positive decimal number"));
        }
        let mut all: String = int_part.trim_start_matches('0').into();
        all.push_str(frac_part);
        let mut scale = frac_part.len() as i32 - exponent;
        // Strip trailing zeros before checking the digit budget.
        while all.ends_with('0') && all.len() > 1 {
            all.pop();
            scale -= 1;
        }
        let all = all.trim_start_matches('0');
        if all.is_empty() {
            return Err(invalid("kappa must be positive"));
        }
        if all.len() > 12 {
            return Err(invalid("at most 12 significant digits"));
        }
        let mut digits: u64 = all.parse().map_err(|_| invalid("malformed digits"))?;
        while scale < 0 {
            digits = digits
                .checked_mul(10)
                .filter(|d| *d < MAX_DIGITS)
                .ok_or_else(|| invalid("kappa too large"))?;
            scale += 1;
        }
        Kappa::from_parts(digits, scale as u32)
    }
}

impl fmt::Display for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.digits);
        }
        let pow = 10u64.pow(self.scale.min(19));
        if self.scale <= 19 {
            write!(
                f,
                "{}.{:0width$}",
                self.digits / pow,
                self.digits % pow,
                width = self.scale as usize
            )
        } else {
            write!(f, "{}e-{}", self.digits, self.scale)
        }
    }
}
