//! Run reports and their deterministic JSON form.

use std::fmt::Write as _;

use serde_json::{Map, Number, Value};
use sha2::{Digest, Sha256};

/// Significant digits for every float in a report.
pub const FLOAT_DIGITS: usize = 15;

/// One input file and its SHA-256.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(name: impl Into<String>, bytes: &[u8]) -> Self {
        Self { name: name.into(), sha256: hex::encode(Sha256::digest(bytes)) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub results: Map<String, Value>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn new(command: Vec<String>) -> Self {
        Self { command, inputs: Vec::new(), results: Map::new(), warnings: Vec::new() }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.results.insert(key.to_string(), value.into());
    }

    pub fn to_value(&self) -> Value {
        let mut out = Map::new();
        out.insert("command".into(), self.command.iter().cloned().map(Value::String).collect());
        out.insert(
            "inputs".into(),
            self.inputs
                .iter()
                .map(|d| {
                    let mut m = Map::new();
                    m.insert("name".into(), Value::String(d.name.clone()));
                    m.insert("sha256".into(), Value::String(d.sha256.clone()));
                    Value::Object(m)
                })
                .collect(),
        );
        out.insert("results".into(), Value::Object(self.results.clone()));
        out.insert("warnings".into(), self.warnings.iter().cloned().map(Value::String).collect());
        Value::Object(out)
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report values serialize");
        s.push('\n');
        s
    }

    /// Indented `key: value` listing for terminals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        write_text(&mut out, &Value::Object(self.results.clone()), 0);
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("null".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn write_text(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                match scalar_text(v) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}{k}: {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}{k}:");
                        write_text(out, v, indent + 1);
                    }
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                match scalar_text(item) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}- {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}-");
                        write_text(out, item, indent + 1);
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar_text(other).unwrap_or_default());
        }
    }
}

/// Decimal spelling of `x` rounded to [`FLOAT_DIGITS`] significant digits,
/// trailing zeros dropped. Plain notation for exponents in `-5..15`,
/// scientific otherwise.
pub fn format_float(x: f64) -> Option<String> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some("0".into());
    }
    let sci = format!("{:.*e}", FLOAT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    if (-5..15).contains(&exp) {
        if exp < 0 {
            s.push_str("0.");
            s.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
            s.push_str(digits);
        } else {
            let int_len = exp as usize + 1;
            if digits.len() <= int_len {
                s.push_str(digits);
                s.extend(std::iter::repeat_n('0', int_len - digits.len()));
            } else {
                s.push_str(&digits[..int_len]);
                s.push('.');
                s.push_str(&digits[int_len..]);
            }
        }
    } else {
        s.push_str(&digits[..1]);
        if digits.len() > 1 {
            s.push('.');
            s.push_str(&digits[1..]);
        }
        let _ = write!(s, "e{exp}");
    }
    Some(s)
}

/// A JSON number carrying exactly the [`format_float`] digits; `null` for
/// non-finite values.
pub fn float(x: f64) -> Value {
    match format_float(x) {
        Some(s) => Value::Number(s.parse::<Number>().expect("valid JSON number")),
        None => Value::Null,
    }
}

pub fn object<const N: usize>(entries: [(&str, Value); N]) -> Value {
    Value::Object(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}
