//! CSV and JSON emitters for sweep tables, protocol records and reports.
//!
//! Floats are written with 9 significant digits in both formats, so a CSV
//! cell and the matching JSON number carry the same value.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::chsh::SweepRow;
use crate::measurement::ProtocolRecord;

pub const SIGNIFICANT_DIGITS: usize = 9;

/// Fixed-point rendering with [`SIGNIFICANT_DIGITS`] significant digits.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    // The exponent of the rounded value, not of x, decides the precision.
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let exp: i32 = sci
        .split('e')
        .nth(1)
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

/// `x` rounded to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    format_sig(x).parse().unwrap_or(x)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["d", "closed_form", "numeric", "violates"])?;
    for r in rows {
        w.write_record([
            r.d.to_string(),
            format_sig(r.closed_form),
            format_sig(r.numeric),
            r.violates.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Row objects with floats rounded as in the CSV form.
pub fn sweep_json_rows(rows: &[SweepRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                json!({
                    "d": r.d,
                    "closed_form": round_sig(r.closed_form),
                    "numeric": round_sig(r.numeric),
                    "violates": r.violates,
                })
            })
            .collect(),
    )
}

/// Header `p,q,a_setting,b_setting,a_result,b_result`; settings as 0/1, results as −1/0/1.
pub fn write_records_csv<W: Write>(records: &[ProtocolRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record(["p", "q", "a_setting", "b_setting", "a_result", "b_result"])?;
    }
    w.flush()?;
    Ok(())
}

/// Metadata block of every JSON document.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_min: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

impl Meta {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            d: None,
            d_min: None,
            d_max: None,
            trials: None,
        }
    }
}

/// `{"meta": ..., "data": ...}`.
pub fn envelope(meta: &Meta, data: Value) -> Value {
    json!({ "meta": meta, "data": data })
}

/// Recursively rounds every float in a JSON value to 9 significant digits.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(0.0));
            serde_json::Number::from_f64(x)
                .map(Value::Number)
                .unwrap_or(Value::Null)
        }
        Value::Array(xs) => Value::Array(xs.into_iter().map(round_floats).collect()),
        Value::Object(m) => {
            Value::Object(m.into_iter().map(|(k, x)| (k, round_floats(x))).collect())
        }
        other => other,
    }
}
