//! JSON memory-design problem files.
//!
//! ```json
//! {
//!   "base": "base-model.json",
//!   "registers": 256,
//!   "budget": 1,
//!   "parameters": {"mu1": 1.2},
//!   "kinds": [
//!     {"name": "fast", "cell_cost": "1/1073741824",
//!      "access_classes": [{"count": 46, "time": {"base": 1, "coeffs": {"mu1": 1}}}]}
//!   ]
//! }
//! ```
//!
//! `base` is an inline model document or a path relative to the problem file.
//! `parameters` declares every parameter the kinds use, with default values;
//! it also supplies values for parameters the base model declares.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use compcap_core::memory::{AccessClass, MemoryDesignProblem, MemoryKind};
use compcap_core::model::{InstructionSet, ModelError, ParameterBinding};
use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;
use crate::model_file::{FormatError, ModelDoc, Scalar, TimeDoc};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AccessDoc {
    count: Scalar,
    time: TimeDoc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KindDoc {
    name: String,
    cell_cost: Scalar,
    access_classes: Vec<AccessDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDoc {
    base: Value,
    registers: Scalar,
    budget: Scalar,
    #[serde(default)]
    parameters: BTreeMap<String, Scalar>,
    kinds: Vec<KindDoc>,
}

/// A problem file read from disk, before parameters are bound.
#[derive(Debug)]
pub struct ProblemFile {
    pub base: InstructionSet,
    /// Path of an external base model, if `base` was a string.
    pub base_path: Option<PathBuf>,
    pub base_bytes: Option<Vec<u8>>,
    pub registers: num_bigint::BigUint,
    pub budget: compcap_core::Rational,
    pub defaults: ParameterBinding,
    pub kinds: Vec<MemoryKind>,
}

impl ProblemFile {
    /// Every parameter name the problem accepts.
    pub fn declared(&self) -> Vec<String> {
        let mut names: Vec<String> = self.defaults.iter().map(|(k, _)| k.clone()).collect();
        for p in self.base.parameters() {
            if !names.contains(p) {
                names.push(p.clone());
            }
        }
        names.sort();
        names
    }

    /// Builds the problem, with `overrides` replacing file defaults.
    pub fn build(&self, overrides: &ParameterBinding) -> Result<MemoryDesignProblem, CliError> {
        let declared = self.declared();
        let mut binding = self.defaults.clone();
        for (name, value) in overrides.iter() {
            if !declared.contains(name) {
                return Err(ModelError::ExtraneousParameter(name.clone()).into());
            }
            binding.insert(name.clone(), value.clone());
        }
        for (name, value) in binding.iter() {
            if value < &compcap_core::Rational::from_integer(0.into()) {
                return Err(ModelError::NegativeParameter(name.clone()).into());
            }
        }
        let base_names = self.base.parameters().iter().map(String::as_str);
        self.base.bind(&binding.restricted_to(base_names))?;
        Ok(MemoryDesignProblem::new(
            self.base.clone(),
            self.registers.clone(),
            self.kinds.clone(),
            self.budget.clone(),
            binding,
        )?)
    }
}

/// Parses a problem document; `dir` resolves a relative base path.
pub fn parse_problem(text: &str, dir: &Path) -> Result<ProblemFile, CliError> {
    let doc: ProblemDoc = serde_json::from_str(text).map_err(FormatError::from)?;
    let (base, base_path, base_bytes) = match doc.base {
        Value::String(rel) => {
            let path = dir.join(&rel);
            let bytes = std::fs::read(&path).map_err(|e| CliError::input(path.display(), e))?;
            let text = String::from_utf8(bytes.clone()).map_err(|e| CliError::input(path.display(), e))?;
            let set = crate::model_file::parse_model(&text)
                .map_err(|e| prefix(e, &format!("base model {}", path.display())))?;
            (set, Some(path), Some(bytes))
        }
        obj @ Value::Object(_) => {
            let model: ModelDoc = serde_json::from_value(obj)
                .map_err(|e| CliError::Input(format!("base: {e}")))?;
            (model.to_set().map_err(|e| prefix(e, "base"))?, None, None)
        }
        _ => return Err(CliError::Input("base: expected a model object or a path".into())),
    };
    let registers = doc.registers.count("registers")?;
    let budget = doc.budget.rational("budget")?;
    let mut defaults = ParameterBinding::new();
    for (name, v) in &doc.parameters {
        defaults.insert(name.clone(), v.rational(&format!("parameters.{name}"))?);
    }
    let mut kinds = Vec::with_capacity(doc.kinds.len());
    for (i, k) in doc.kinds.iter().enumerate() {
        let path = format!("kinds[{i}]");
        let mut classes = Vec::with_capacity(k.access_classes.len());
        for (j, a) in k.access_classes.iter().enumerate() {
            let apath = format!("{path}.access_classes[{j}]");
            classes.push(AccessClass::new(
                a.count.count(&format!("{apath}.count"))?,
                a.time.to_expression(&format!("{apath}.time"))?,
            ));
        }
        kinds.push(MemoryKind::new(k.name.clone(), k.cell_cost.rational(&format!("{path}.cell_cost"))?, classes));
    }
    Ok(ProblemFile { base, base_path, base_bytes, registers, budget, defaults, kinds })
}

fn prefix(e: FormatError, context: &str) -> CliError {
    match e {
        FormatError::Model(m) => m.into(),
        other => CliError::Input(format!("{context}: {other}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use compcap_core::rational::parse_rational;

    const SMALL: &str = r#"{
        "base": {"name": "b", "classes": [{"name": "r", "count": 2, "time": {"base": 1}}]},
        "registers": 1,
        "budget": 2,
        "kinds": [
            {"name": "A", "cell_cost": 1, "access_classes": [{"count": 2, "time": {"base": 1}}]},
            {"name": "B", "cell_cost": 2, "access_classes": [{"count": 2, "time": {"base": 1}}]}
        ]
    }"#;

    #[test]
    fn small_problem() {
        let file = parse_problem(SMALL, Path::new(".")).unwrap();
        let p = file.build(&ParameterBinding::new()).unwrap();
        let out = p.optimize_grid(1, 1e-12).unwrap();
        assert!((out.best.capacity_bits() - 6f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn parameter_overrides() {
        let text = r#"{
            "base": {"name": "b", "classes": [{"name": "r", "count": 2, "time": {"base": 1}}]},
            "registers": 1, "budget": 1, "parameters": {"mu": 1},
            "kinds": [{"name": "A", "cell_cost": 1,
                       "access_classes": [{"count": 1, "time": {"base": 1, "coeffs": {"mu": 1}}}]}]
        }"#;
        let file = parse_problem(text, Path::new(".")).unwrap();
        assert_eq!(file.declared(), vec!["mu".to_string()]);
        let p = file.build(&ParameterBinding::new().with("mu", parse_rational("2").unwrap())).unwrap();
        assert_eq!(p.binding().get("mu"), Some(&parse_rational("2").unwrap()));
        let err = file.build(&ParameterBinding::new().with("nu", parse_rational("2").unwrap())).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn missing_base_parameter() {
        let text = r#"{
            "base": {"name": "b", "parameters": ["mu"],
                     "classes": [{"name": "r", "count": 2, "time": {"base": 1, "coeffs": {"mu": 1}}}]},
            "registers": 1, "budget": 1, "kinds": []
        }"#;
        let file = parse_problem(text, Path::new(".")).unwrap();
        assert_eq!(file.build(&ParameterBinding::new()).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn malformed() {
        let bad = r#"{"base": 3, "registers": 1, "budget": 1, "kinds": []}"#;
        assert_eq!(parse_problem(bad, Path::new(".")).unwrap_err().exit_code(), 2);
        let missing = r#"{"base": "does-not-exist.json", "registers": 1, "budget": 1, "kinds": []}"#;
        assert_eq!(parse_problem(missing, Path::new(".")).unwrap_err().exit_code(), 2);
    }
}
