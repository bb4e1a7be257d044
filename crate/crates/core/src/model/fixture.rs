//! Plain-text instance format.
//!
//! ```text
//! SBP v1 <n> <m> <kappa>
//! <m lines of n characters, '+' or '-'>
//! planted <n characters>        (optional)
//! ```
//!
//! The reader also accepts U+2212 for `-`. Blank lines and lines starting
//! with `#` are skipped.

use alloc::{string::String, vec::Vec};
use core::fmt::Write;

use super::{ConstraintMatrix, SpinVector};
use crate::{Error, Kappa, Result};

/// A matrix together with its band and, for planted instances, the planted
/// solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixture {
    pub kappa: Kappa,
    pub matrix: ConstraintMatrix,
    pub planted: Option<SpinVector>,
}

fn push_signs(out: &mut String, signs: impl Iterator<Item = i8>) {
    out.extend(signs.map(|s| if s > 0 { '+' } else { '-' }));
    out.push('\n');
}

pub fn write_fixture(fixture: &Fixture) -> String {
    let g = &fixture.matrix;
    let mut out = String::new();
    let _ = writeln!(out, "SBP v1 {} {} {}", g.n(), g.m(), fixture.kappa);
    for j in 0..g.m() {
        push_signs(&mut out, (0..g.n()).map(|i| g.get(j, i)));
    }
    if let Some(x) = &fixture.planted {
        out.push_str("planted ");
        push_signs(&mut out, x.signs().into_iter());
    }
    out
}

fn parse_signs(text: &str, n: usize, line: usize) -> Result<Vec<i8>> {
    let signs = text
        .chars()
        .map(|c| match c {
            '+' => Ok(1),
            '-' | '\u{2212}' => Ok(-1),
            _ => Err(Error::Fixture { line, reason: "expected '+' or '-'" }),
        })
        .collect::<Result<Vec<i8>>>()?;
    if signs.len() != n {
        return Err(Error::Fixture { line, reason: "row length differs from n" });
    }
    Ok(signs)
}

pub fn parse_fixture(text: &str) -> Result<Fixture> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = lines.next().ok_or(Error::Fixture { line: 1, reason: "empty fixture" })?;
    let bad_header = Error::Fixture { line: hl, reason: "header must be 'SBP v1 n m kappa'" };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [magic, version, n, m, kappa] = fields[..] else {
        return Err(bad_header);
    };
    if magic != "SBP" {
        return Err(bad_header);
    }
    if version != "v1" {
        return Err(Error::Fixture { line: hl, reason: "unsupported fixture version" });
    }
    let (n, m): (usize, usize) = match (n.parse(), m.parse()) {
        (Ok(n), Ok(m)) if n > 0 && m > 0 => (n, m),
        _ => return Err(bad_header),
    };
    let kappa: Kappa = kappa.parse()?;
    let mut rows = Vec::with_capacity(m);
    for j in 0..m {
        let (line, text) = lines.next().ok_or(Error::Fixture {
            line: hl + j + 1,
            reason: "fewer than m matrix rows",
        })?;
        rows.push(SpinVector::from_signs(&parse_signs(text, n, line)?));
    }
    let planted = match lines.next() {
        None => None,
        Some((line, text)) => {
            let rest = text
                .strip_prefix("planted")
                .ok_or(Error::Fixture { line, reason: "trailing content after matrix rows" })?;
            Some(SpinVector::from_signs(&parse_signs(rest.trim(), n, line)?))
        }
    };
    if let Some((line, _)) = lines.next() {
        return Err(Error::Fixture { line, reason: "trailing content after planted line" });
    }
    Ok(Fixture {
        kappa,
        matrix: ConstraintMatrix::from_rows(n, &rows)?,
        planted,
    })
}
