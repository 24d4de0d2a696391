//! Serialization helpers: every float is written with 17 significant digits
//! so that CSV and JSON values parse back to the identical double.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Csv,
    Json,
}

/// `d.dddddddddddddddde±x`, 17 significant digits.
pub fn float17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt_float17(v: Option<f64>) -> String {
    v.filter(|v| v.is_finite()).map(float17).unwrap_or_default()
}

struct Float17;

impl Formatter for Float17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        writer.write_all(float17(value).as_bytes())
    }
}

/// Compact JSON with 17-digit floats.
pub fn to_json(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Float17);
    value.serialize(&mut ser).expect("in-memory write");
    let mut s = String::from_utf8(out).expect("utf-8");
    s.push('\n');
    s
}

/// JSON number for finite values, `null` otherwise.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn opt_num(v: Option<f64>) -> Value {
    v.map_or(Value::Null, num)
}

pub fn envelope(command: &str, inputs: Value, results: Value) -> Value {
    serde_json::json!({
        "command": command,
        "inputs": inputs,
        "results": results,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

pub fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(header).expect("in-memory write");
    for row in rows {
        wtr.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(wtr.into_inner().expect("flush")).expect("utf-8")
}

/// Writes the report to `out`, or to stdout when no path is given.
pub fn emit(report: &str, out: Option<&Path>) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, report),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(report.as_bytes())?;
            stdout.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.23606797749979, 1e-300, 6.02e23, 0.0] {
            let s = float17(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn json_uses_seventeen_digits() {
        let v = envelope("approx", serde_json::json!({"x": 5.0}), serde_json::json!({"r": 0.1, "n": 3}));
        let s = to_json(&v);
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"n\":3"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["results"]["r"].as_f64(), Some(0.1));
        assert_eq!(back["version"], env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn non_finite_is_null() {
        assert_eq!(num(f64::INFINITY), Value::Null);
        assert_eq!(opt_float17(Some(f64::NAN)), "");
    }
}
