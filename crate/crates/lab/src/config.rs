//! Flat `key = value` experiment configuration.
//!
//! One setting per line; `#` starts a comment; keys may appear once.
//!
//! | key             | value                                                        |
//! |-----------------|--------------------------------------------------------------|
//! | `experiment`    | `lognormal`, `cycles`, `convinp`, `threshold`, `freezing`, `contiguity`, `hypothesis`, `constants` |
//! | `kappa`         | decimal, at most 12 significant digits                       |
//! | `alpha` / `m`   | constraint density, or an explicit row count (not both)      |
//! | `n`             | comma-separated list of sizes                                |
//! | `replicas`      | replicas per grid point                                      |
//! | `m1`            | largest cycle length `M1 ≥ 2`                                |
//! | `seed`          | base seed (u64)                                              |
//! | `workers`       | worker threads                                               |
//! | `out`           | output directory                                             |
//! | `format`        | record format, `jsonl` or `csv`                              |
//! | `measure`       | `null`, `planted` or `pair` (cycles)                         |
//! | `overlap`       | integer `⟨X1, X2⟩` for `pair`, same parity as `n`             |
//! | `alpha_factors` | multiples of `α_c(κ)` (threshold, freezing, hypothesis)      |
//! | `distances`     | fractions of `n`, or `1/n` (freezing)                        |
//! | `event`         | `always`, `z_zero`, `log_ratio_below:<c>`, `c2_above:<c>`    |
//! | `kappas`        | `κ` grid (hypothesis)                                        |
//! | `beta`          | `finite` (β_n) or `asymptotic` (β) in `Y`                    |
//! | `retry_budget`  | matrices drawn per replica looking for `Z ≥ 1` (freezing)    |
//! | `timings`       | `true` adds per-replica wall time to records                 |
//!
//! [`ExperimentConfig::to_text`] writes every key, and parsing that text
//! gives back an equal config.

use std::{fmt, path::PathBuf, str::FromStr};

use sbp_core::{cycles::BetaConvention, Kappa};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

const KEYS: &[&str] = &[
    "experiment",
    "kappa",
    "alpha",
    "m",
    "n",
    "replicas",
    "m1",
    "seed",
    "workers",
    "out",
    "format",
    "measure",
    "overlap",
    "alpha_factors",
    "distances",
    "event",
    "kappas",
    "beta",
    "retry_budget",
    "timings",
];

/// Keys that do not influence record content and are left out of the hash.
const UNHASHED: &[&str] = &["workers", "out", "format"];

macro_rules! keyword_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn name(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(format!(
                        "expected one of {}",
                        [$($text),+].join(", ")
                    )),
                }
            }
        }
    };
}

keyword_enum!(ExperimentKind {
    Lognormal => "lognormal",
    Cycles => "cycles",
    Convinp => "convinp",
    Threshold => "threshold",
    Freezing => "freezing",
    Contiguity => "contiguity",
    Hypothesis => "hypothesis",
    Constants => "constants",
});

keyword_enum!(
    /// Law of the disorder in the cycle experiment.
    Measure {
        Null => "null",
        Planted => "planted",
        Pair => "pair",
    }
);

keyword_enum!(OutputFormat {
    Jsonl => "jsonl",
    Csv => "csv",
});

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    Alpha(f64),
    Rows(usize),
}

impl Density {
    /// `m = ⌊αn⌋`, or the fixed row count.
    pub fn m_for(self, n: usize) -> usize {
        match self {
            Density::Alpha(a) => (a * n as f64).floor() as usize,
            Density::Rows(m) => m,
        }
    }

    pub fn alpha_for(self, n: usize) -> f64 {
        match self {
            Density::Alpha(a) => a,
            Density::Rows(m) => m as f64 / n as f64,
        }
    }
}

/// Search distance of the freezing experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distance {
    /// One spin flip, written `1/n`.
    OneFlip,
    Fraction(f64),
}

impl Distance {
    /// Hamming radius `⌈d·n⌉`.
    pub fn radius(self, n: usize) -> usize {
        match self {
            Distance::OneFlip => 1,
            Distance::Fraction(d) => (d * n as f64).ceil() as usize,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::OneFlip => f.write_str("1/n"),
            Distance::Fraction(d) => write!(f, "{d}"),
        }
    }
}

/// Predicate of `G` whose probability the contiguity experiment estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventSpec {
    Always,
    /// `Z = 0`.
    ZZero,
    /// `log(Z/E[Z]) < c`.
    LogRatioBelow(f64),
    /// `C_2 > c`.
    C2Above(f64),
}

impl fmt::Display for EventSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventSpec::Always => f.write_str("always"),
            EventSpec::ZZero => f.write_str("z_zero"),
            EventSpec::LogRatioBelow(c) => write!(f, "log_ratio_below:{c}"),
            EventSpec::C2Above(c) => write!(f, "c2_above:{c}"),
        }
    }
}

impl FromStr for EventSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (name, arg) = match s.split_once(':') {
            Some((name, arg)) => (name.trim(), Some(arg.trim())),
            None => (s, None),
        };
        let threshold = || -> std::result::Result<f64, String> {
            arg.ok_or_else(|| format!("`{name}` needs a threshold, e.g. `{name}:-3`"))
                .and_then(parse_real)
        };
        match (name, arg) {
            ("always", None) => Ok(EventSpec::Always),
            ("z_zero", None) => Ok(EventSpec::ZZero),
            ("log_ratio_below", _) => Ok(EventSpec::LogRatioBelow(threshold()?)),
            ("c2_above", _) => Ok(EventSpec::C2Above(threshold()?)),
            _ => Err("expected always, z_zero, log_ratio_below:<c> or c2_above:<c>".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub kappa: Kappa,
    pub density: Density,
    pub n: Vec<usize>,
    pub replicas: usize,
    pub m1: usize,
    pub seed: u64,
    pub workers: usize,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub measure: Measure,
    pub overlap: i64,
    pub alpha_factors: Vec<f64>,
    pub distances: Vec<Distance>,
    pub event: EventSpec,
    pub kappas: Vec<f64>,
    pub beta: BetaConvention,
    pub retry_budget: usize,
    pub timings: bool,
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a finite number")),
    }
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    parse_real(s).and_then(|v| if v > 0.0 { Ok(v) } else { Err(format!("`{s}` must be positive")) })
}

fn parse_int<T: FromStr>(s: &str) -> std::result::Result<T, String> {
    s.trim().parse().map_err(|_| format!("`{s}` is not a valid integer"))
}

fn parse_count(s: &str) -> std::result::Result<usize, String> {
    parse_int(s).and_then(|v: usize| if v > 0 { Ok(v) } else { Err("must be at least 1".into()) })
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Vec<T>, String> {
    let items: Vec<T> = s.split(',').map(|t| item(t.trim())).collect::<std::result::Result<_, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

/// `count` evenly spaced values on `[lo, hi]`.
fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

impl ExperimentConfig {
    /// Defaults sized for a desk run of each experiment.
    pub fn defaults(experiment: ExperimentKind) -> Self {
        let mut c = ExperimentConfig {
            experiment,
            kappa: Kappa::from_parts(1, 0).expect("1 is a valid kappa"),
            density: Density::Alpha(0.9),
            n: vec![24],
            replicas: 300,
            m1: 4,
            seed: 1,
            workers: 1,
            out: PathBuf::from("sbp-out"),
            format: OutputFormat::Jsonl,
            measure: Measure::Null,
            overlap: 0,
            alpha_factors: vec![0.5, 0.8, 1.0, 1.3],
            distances: vec![
                Distance::OneFlip,
                Distance::Fraction(0.02),
                Distance::Fraction(0.05),
                Distance::Fraction(0.1),
                Distance::Fraction(0.2),
            ],
            event: EventSpec::LogRatioBelow(-3.0),
            kappas: linspace(0.3, 3.0, 10),
            beta: BetaConvention::Finite,
            retry_budget: 100,
            timings: false,
        };
        match experiment {
            ExperimentKind::Lognormal | ExperimentKind::Convinp => {}
            ExperimentKind::Cycles => {
                c.n = vec![200];
                c.replicas = 2000;
            }
            ExperimentKind::Threshold => {
                c.n = vec![16, 20, 24];
                c.replicas = 500;
            }
            ExperimentKind::Freezing => {
                c.kappa = Kappa::from_parts(5, 1).expect("0.5 is a valid kappa");
                c.n = vec![22];
                c.replicas = 100;
                c.alpha_factors = vec![0.3, 0.5, 0.7];
            }
            ExperimentKind::Contiguity => {
                c.n = vec![20];
                c.replicas = 500;
            }
            ExperimentKind::Hypothesis => {
                c.alpha_factors = linspace(0.095, 0.95, 10);
            }
            ExperimentKind::Constants => {
                c.n = vec![24, 200, 800];
            }
        }
        c
    }

    /// Parses config text. `fallback` names the experiment when the text has
    /// no `experiment` key; if both are present they must agree.
    pub fn parse(text: &str, fallback: Option<ExperimentKind>) -> Result<Self> {
        let mut entries: Vec<(usize, &str, &str)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| LabError::config(line, content, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(LabError::config(line, key, "unknown key"));
            }
            if let Some((first, ..)) = entries.iter().find(|(_, k, _)| *k == key) {
                return Err(LabError::config(line, key, format!("duplicate key (first set on line {first})")));
            }
            if value.is_empty() {
                return Err(LabError::config(line, key, "empty value"));
            }
            entries.push((line, key, value));
        }
        let named = entries.iter().find(|(_, k, _)| *k == "experiment");
        let experiment = match (named, fallback) {
            (Some(&(line, key, value)), fallback) => {
                let kind: ExperimentKind = value.parse().map_err(|e| LabError::config(line, key, e))?;
                if let Some(f) = fallback.filter(|f| *f != kind) {
                    return Err(LabError::config(
                        line,
                        key,
                        format!("config names `{kind}` but the `{f}` subcommand was used"),
                    ));
                }
                kind
            }
            (None, Some(f)) => f,
            (None, None) => return Err(LabError::config(0, "experiment", "missing key")),
        };
        let mut config = Self::defaults(experiment);
        let mut density_line = None;
        for &(line, key, value) in &entries {
            if matches!(key, "alpha" | "m") {
                if let Some(first) = density_line {
                    return Err(LabError::config(line, key, format!("`alpha` and `m` are exclusive (line {first})")));
                }
                density_line = Some(line);
            }
            config.set(key, value).map_err(|reason| LabError::config(line, key, reason))?;
        }
        Ok(config)
    }

    fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        match key {
            "experiment" => self.experiment = v.parse()?,
            "kappa" => self.kappa = v.parse().map_err(|e: sbp_core::Error| e.to_string())?,
            "alpha" => self.density = Density::Alpha(parse_positive(v)?),
            "m" => self.density = Density::Rows(parse_count(v)?),
            "n" => self.n = parse_list(v, parse_count)?,
            "replicas" => self.replicas = parse_count(v)?,
            "m1" => {
                self.m1 = parse_int(v)?;
                if self.m1 < 2 {
                    return Err("M1 must be at least 2".into());
                }
            }
            "seed" => self.seed = parse_int(v)?,
            "workers" => self.workers = parse_count(v)?,
            "out" => self.out = PathBuf::from(v),
            "format" => self.format = v.parse()?,
            "measure" => self.measure = v.parse()?,
            "overlap" => self.overlap = parse_int(v)?,
            "alpha_factors" => self.alpha_factors = parse_list(v, parse_positive)?,
            "distances" => {
                self.distances = parse_list(v, |t| match t {
                    "1/n" => Ok(Distance::OneFlip),
                    t => parse_real(t).and_then(|d| {
                        if (0.0..=1.0).contains(&d) {
                            Ok(Distance::Fraction(d))
                        } else {
                            Err(format!("distance `{t}` must lie in [0, 1]"))
                        }
                    }),
                })?
            }
            "event" => self.event = v.parse()?,
            "kappas" => self.kappas = parse_list(v, parse_positive)?,
            "beta" => {
                self.beta = match v {
                    "finite" => BetaConvention::Finite,
                    "asymptotic" => BetaConvention::Asymptotic,
                    _ => return Err("expected finite or asymptotic".into()),
                }
            }
            "retry_budget" => self.retry_budget = parse_count(v)?,
            "timings" => {
                self.timings = match v {
                    "true" => true,
                    "false" => false,
                    _ => return Err("expected true or false".into()),
                }
            }
            _ => unreachable!("keys are checked against KEYS"),
        }
        Ok(())
    }

    fn entries(&self) -> Vec<(&'static str, String)> {
        let (density_key, density) = match self.density {
            Density::Alpha(a) => ("alpha", a.to_string()),
            Density::Rows(m) => ("m", m.to_string()),
        };
        let beta = match self.beta {
            BetaConvention::Finite => "finite",
            BetaConvention::Asymptotic => "asymptotic",
        };
        vec![
            ("experiment", self.experiment.to_string()),
            ("kappa", self.kappa.to_string()),
            (density_key, density),
            ("n", join(&self.n)),
            ("replicas", self.replicas.to_string()),
            ("m1", self.m1.to_string()),
            ("seed", self.seed.to_string()),
            ("workers", self.workers.to_string()),
            ("out", self.out.display().to_string()),
            ("format", self.format.to_string()),
            ("measure", self.measure.to_string()),
            ("overlap", self.overlap.to_string()),
            ("alpha_factors", join(&self.alpha_factors)),
            ("distances", join(&self.distances)),
            ("event", self.event.to_string()),
            ("kappas", join(&self.kappas)),
            ("beta", beta.to_string()),
            ("retry_budget", self.retry_budget.to_string()),
            ("timings", self.timings.to_string()),
        ]
    }

    /// Canonical file form with every key.
    pub fn to_text(&self) -> String {
        self.entries().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// SHA-256 (hex) of the canonical text without `workers`, `out` and
    /// `format`, none of which changes record content.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.entries() {
            if !UNHASHED.contains(&k) {
                h.update(format!("{k} = {v}\n"));
            }
        }
        hex::encode(h.finalize())
    }
}
