//! JSON model files.
//!
//! ```json
//! {
//!   "name": "toy",
//!   "parameters": ["mu"],
//!   "classes": [
//!     {"name": "fast", "count": "3*2^4", "time": {"base": 1, "coeffs": {"mu": "1/2"}}},
//!     {"name": "move", "count": 2, "time": {"base": 1}, "family": {"step": 2, "terms": 5}}
//!   ]
//! }
//! ```
//!
//! Counts are integers or `a*2^b` strings; rationals are JSON numbers (read
//! as exact decimals) or `p/q` strings.

use std::collections::BTreeMap;

use compcap_core::model::{InstructionClass, InstructionFamily, InstructionSet, Member, ModelError, TimeExpression};
use compcap_core::rational::{format_rational, parse_count, parse_rational, ParseError, Rational};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Deserialize;
use serde_json::{Map, Number, Value};
use thiserror::Error;

use crate::error::CliError;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("JSON error at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("{path}: {source}")]
    Scalar { path: String, source: ParseError },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        let message = e.to_string();
        let suffix = format!(" at line {} column {}", e.line(), e.column());
        let message = message.strip_suffix(&suffix).map(str::to_string).unwrap_or(message);
        FormatError::Json { line: e.line(), column: e.column(), message }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Model(m) => m.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

/// A number or string in a JSON document.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub(crate) enum Scalar {
    Number(Number),
    Text(String),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Number(n) => n.to_string(),
            Scalar::Text(s) => s.clone(),
        }
    }

    pub(crate) fn rational(&self, path: &str) -> Result<Rational, FormatError> {
        parse_rational(&self.text()).map_err(|source| FormatError::Scalar { path: path.into(), source })
    }

    pub(crate) fn non_negative_rational(&self, path: &str) -> Result<Rational, FormatError> {
        let r = self.rational(path)?;
        if r < Rational::from_integer(0.into()) {
            return Err(FormatError::Invalid { path: path.into(), message: "must be non-negative".into() });
        }
        Ok(r)
    }

    pub(crate) fn count(&self, path: &str) -> Result<BigUint, FormatError> {
        parse_count(&self.text()).map_err(|source| FormatError::Scalar { path: path.into(), source })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct TimeDoc {
    base: Scalar,
    #[serde(default)]
    coeffs: BTreeMap<String, Scalar>,
}

impl TimeDoc {
    pub(crate) fn to_expression(&self, path: &str) -> Result<TimeExpression, FormatError> {
        let mut t = TimeExpression::constant(self.base.non_negative_rational(&format!("{path}.base"))?);
        for (name, c) in &self.coeffs {
            t = t.with_coeff(name.clone(), c.non_negative_rational(&format!("{path}.coeffs.{name}"))?);
        }
        Ok(t)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyDoc {
    step: Scalar,
    terms: Scalar,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassDoc {
    name: String,
    count: Scalar,
    time: TimeDoc,
    #[serde(default)]
    family: Option<FamilyDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ModelDoc {
    name: String,
    #[serde(default)]
    parameters: Vec<String>,
    classes: Vec<ClassDoc>,
}

impl ModelDoc {
    pub(crate) fn to_set(&self) -> Result<InstructionSet, FormatError> {
        let mut members = Vec::with_capacity(self.classes.len());
        for (i, c) in self.classes.iter().enumerate() {
            let path = format!("classes[{i}]");
            let count = c.count.count(&format!("{path}.count"))?;
            let time = c.time.to_expression(&format!("{path}.time"))?;
            members.push(match &c.family {
                None => Member::Class(InstructionClass { name: c.name.clone(), count, time }),
                Some(f) => {
                    let terms_path = format!("{path}.family.terms");
                    let terms = f.terms.count(&terms_path)?.to_u64().ok_or(FormatError::Invalid {
                        path: terms_path,
                        message: "more than 2^64 terms".into(),
                    })?;
                    Member::Family(InstructionFamily {
                        name: c.name.clone(),
                        count_per_term: count,
                        time_base: time,
                        step: f.step.rational(&format!("{path}.family.step"))?,
                        num_terms: terms,
                    })
                }
            });
        }
        Ok(InstructionSet::new(self.name.clone(), self.parameters.clone(), members)?)
    }
}

/// Parses and validates a model document.
pub fn parse_model(text: &str) -> Result<InstructionSet, FormatError> {
    let doc: ModelDoc = serde_json::from_str(text)?;
    doc.to_set()
}

pub(crate) fn rational_value(r: &Rational) -> Value {
    if r.is_integer() {
        Value::Number(r.numer().to_string().parse().expect("integer literal"))
    } else {
        Value::String(format_rational(r))
    }
}

pub(crate) fn count_value(n: &BigUint) -> Value {
    let tz = n.trailing_zeros().unwrap_or(0);
    if n.bits() <= 53 && tz < 16 {
        return Value::Number(n.to_string().parse().expect("integer literal"));
    }
    let odd = n >> tz;
    if odd == BigUint::from(1u32) {
        Value::String(format!("2^{tz}"))
    } else {
        Value::String(format!("{odd}*2^{tz}"))
    }
}

fn time_value(t: &TimeExpression) -> Value {
    let mut obj = Map::new();
    obj.insert("base".into(), rational_value(t.base()));
    if !t.is_constant() {
        let coeffs: Map<String, Value> = t.coeffs().iter().map(|(k, v)| (k.clone(), rational_value(v))).collect();
        obj.insert("coeffs".into(), Value::Object(coeffs));
    }
    Value::Object(obj)
}

/// The JSON document for a set; `parse_model` reads it back unchanged.
pub fn model_to_json(set: &InstructionSet) -> Value {
    let classes = set
        .members()
        .iter()
        .map(|m| {
            let mut obj = Map::new();
            obj.insert("name".into(), Value::String(m.name().into()));
            match m {
                Member::Class(c) => {
                    obj.insert("count".into(), count_value(&c.count));
                    obj.insert("time".into(), time_value(&c.time));
                }
                Member::Family(f) => {
                    obj.insert("count".into(), count_value(&f.count_per_term));
                    obj.insert("time".into(), time_value(&f.time_base));
                    let mut fam = Map::new();
                    fam.insert("step".into(), rational_value(&f.step));
                    fam.insert("terms".into(), count_value(&BigUint::from(f.num_terms)));
                    obj.insert("family".into(), Value::Object(fam));
                }
            }
            Value::Object(obj)
        })
        .collect();
    let mut doc = Map::new();
    doc.insert("name".into(), Value::String(set.name().into()));
    doc.insert(
        "parameters".into(),
        Value::Array(set.parameters().iter().cloned().map(Value::String).collect()),
    );
    doc.insert("classes".into(), Value::Array(classes));
    Value::Object(doc)
}
