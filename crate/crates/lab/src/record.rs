//! Versioned records and verdicts, and their JSONL / CSV forms.
//!
//! Every persisted object carries `"schema": 1`. Reals are written as
//! decimals with 17 significant digits (`d.dddddddddddddddde±x`); non-finite
//! reals become `null`.

use std::{
    fs,
    io::{BufWriter, Write},
    path::Path,
    str::FromStr,
};

use sbp_core::stats::TestVerdict;
use serde_json::{Map, Number, Value};

use crate::error::{LabError, Result};

pub const SCHEMA_VERSION: u64 = 1;

/// JSON value of a real with 17 significant digits.
pub fn real(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Value::Number(Number::from_str(&format!("{x:.16e}")).expect("formatted real is valid JSON"))
}

/// Ordered field map of one record.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Record(Map<String, Value>);

impl Record {
    pub fn new() -> Self {
        Record::default()
    }

    pub fn put_real(&mut self, key: &str, x: f64) -> &mut Self {
        self.0.insert(key.into(), real(x));
        self
    }

    pub fn put_opt_real(&mut self, key: &str, x: Option<f64>) -> &mut Self {
        self.0.insert(key.into(), x.map_or(Value::Null, real));
        self
    }

    pub fn put_int(&mut self, key: &str, x: impl Into<i128>) -> &mut Self {
        let x: i128 = x.into();
        let v = match (u64::try_from(x), i64::try_from(x)) {
            (Ok(u), _) => Value::from(u),
            (_, Ok(i)) => Value::from(i),
            _ => Value::Number(Number::from_str(&x.to_string()).expect("integer is valid JSON")),
        };
        self.0.insert(key.into(), v);
        self
    }

    pub fn put_opt_int(&mut self, key: &str, x: Option<u64>) -> &mut Self {
        self.0.insert(key.into(), x.map_or(Value::Null, Value::from));
        self
    }

    pub fn put_text(&mut self, key: &str, s: impl Into<String>) -> &mut Self {
        self.0.insert(key.into(), Value::String(s.into()));
        self
    }

    pub fn put_bool(&mut self, key: &str, b: bool) -> &mut Self {
        self.0.insert(key.into(), Value::Bool(b));
        self
    }

    pub fn append(&mut self, other: Record) -> &mut Self {
        self.0.extend(other.0);
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    /// Numeric field as `f64`; `null` reads as `None`.
    pub fn real_of(&self, key: &str) -> Option<f64> {
        self.0.get(key).and_then(Value::as_f64)
    }

    pub fn int_of(&self, key: &str) -> Option<u64> {
        self.0.get(key).and_then(Value::as_u64)
    }

    pub fn bool_of(&self, key: &str) -> Option<bool> {
        self.0.get(key).and_then(Value::as_bool)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.0).expect("records serialize")
    }
}

/// `schema`, `config_hash` and `kind` header followed by `body`.
pub fn stamped(config_hash: &str, kind: &str, body: Record) -> Record {
    let mut r = Record::new();
    r.put_int("schema", SCHEMA_VERSION)
        .put_text("config_hash", config_hash)
        .put_text("kind", kind)
        .append(body);
    r
}

pub fn verdict_record(v: &TestVerdict) -> Record {
    let mut r = Record::new();
    r.put_text("test", v.test.clone())
        .put_real("statistic", v.statistic)
        .put_real("threshold", v.threshold)
        .put_real("p_value_or_band", v.p_value_or_band)
        .put_bool("pass", v.pass)
        .put_bool("hard", v.hard)
        .put_text("details", v.details.clone());
    r
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(LabError::io("cannot create", path))
}

pub fn write_jsonl(path: &Path, records: &[Record]) -> Result<()> {
    let mut w = create(path)?;
    for r in records {
        writeln!(w, "{}", r.to_json_line()).map_err(LabError::io("cannot write", path))?;
    }
    w.flush().map_err(LabError::io("cannot write", path))
}

fn csv_cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

/// CSV with the union of keys, in first-seen order, as header.
pub fn write_csv(path: &Path, records: &[Record]) -> Result<()> {
    let mut header: Vec<&str> = Vec::new();
    for r in records {
        for k in r.keys() {
            if !header.contains(&k) {
                header.push(k);
            }
        }
    }
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(&header)?;
    for r in records {
        w.write_record(header.iter().map(|k| csv_cell(r.get(k))))?;
    }
    w.flush().map_err(LabError::io("cannot write", path))
}

/// Reads a JSONL file of versioned objects, rejecting any other schema.
pub fn load_jsonl(path: &Path) -> Result<Vec<Record>> {
    let text = fs::read_to_string(path).map_err(LabError::io("cannot read", path))?;
    let parse_err = |line: usize, reason: String| LabError::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut out = Vec::new();
    for (i, l) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let value: Value = serde_json::from_str(l).map_err(|e| parse_err(i + 1, e.to_string()))?;
        let Value::Object(map) = value else {
            return Err(parse_err(i + 1, "expected a JSON object".into()));
        };
        match map.get("schema").and_then(Value::as_u64) {
            Some(SCHEMA_VERSION) => out.push(Record(map)),
            _ => {
                return Err(LabError::Schema {
                    found: map.get("schema").map_or("missing".into(), Value::to_string),
                    expected: SCHEMA_VERSION,
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_carry_seventeen_digits() {
        assert_eq!(real(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(real(-2.0).to_string(), "-2.0000000000000000e+0");
        assert_eq!(real(f64::NEG_INFINITY), Value::Null);
        for x in [0.1, 1.0 / 3.0, -7.25e-300, 6.02e23] {
            assert_eq!(real(x).as_f64(), Some(x));
        }
    }

    #[test]
    fn integers_keep_their_sign() {
        let mut r = Record::new();
        r.put_int("a", 3u64).put_int("b", -4i64).put_int("c", u64::MAX);
        assert_eq!(r.to_json_line(), format!("{{\"a\":3,\"b\":-4,\"c\":{}}}", u64::MAX));
    }

    #[test]
    fn jsonl_round_trip_and_schema_gate() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        let mut body = Record::new();
        body.put_real("x", 0.5).put_text("s", "a,b").put_opt_real("y", None);
        let recs = vec![stamped("abc", "replica", body)];
        write_jsonl(&path, &recs).unwrap();
        assert_eq!(load_jsonl(&path).unwrap(), recs);
        fs::write(&path, "{\"schema\":2,\"x\":1}\n").unwrap();
        assert!(matches!(load_jsonl(&path), Err(LabError::Schema { .. })));
        fs::write(&path, "{\"x\":1}\n").unwrap();
        assert!(matches!(load_jsonl(&path), Err(LabError::Schema { .. })));
    }

    #[test]
    fn csv_quotes_and_unions_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut a = Record::new();
        a.put_int("i", 1u64).put_text("s", "x,y");
        let mut b = Record::new();
        b.put_int("i", 2u64).put_bool("f", true);
        write_csv(&path, &[a, b]).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "i,s,f\n1,\"x,y\",\n2,,true\n");
    }
}
