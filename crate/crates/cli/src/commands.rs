//! Subcommand implementations. Each returns a finished report or an error;
//! nothing is printed here.

use std::path::Path;

use compcap_core::counting::CountError;
use compcap_core::memory::{Allocation, OptimizationOutcome, TIE_THRESHOLD};
use compcap_core::model::{BoundInstructionSet, ParameterBinding};
use compcap_core::rational::{format_rational, parse_rational};
use compcap_core::{
    count_sequences, efficiency_from_trace, optimal_distribution, solve_capacity, CapacityResult,
    InstructionSet,
};
use num_bigint::BigUint;
use serde_json::{Map, Value};

use crate::error::CliError;
use crate::model_file::parse_model;
use crate::problem_file::parse_problem;
use crate::report::{float, object, InputDigest, RunReport};
use crate::trace_file::parse_trace;

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Options {
    pub tolerance: f64,
    pub params: ParameterBinding,
}

impl Default for Options {
    fn default() -> Self {
        Self { tolerance: compcap_core::DEFAULT_TOLERANCE, params: ParameterBinding::new() }
    }
}

impl Options {
    /// Collects `NAME=VALUE` flags; malformed or repeated names are
    /// parameter errors.
    pub fn with_params<S: AsRef<str>>(tolerance: f64, params: &[S]) -> Result<Self, CliError> {
        let mut binding = ParameterBinding::new();
        for p in params {
            let p = p.as_ref();
            let (name, value) = p
                .split_once('=')
                .ok_or_else(|| CliError::Parameter(format!("--param {p:?}: expected NAME=VALUE")))?;
            let value = parse_rational(value.trim())
                .map_err(|e| CliError::Parameter(format!("--param {name}: {e}")))?;
            if binding.insert(name.trim(), value).is_some() {
                return Err(CliError::Parameter(format!("--param {name} given more than once")));
            }
        }
        Ok(Self { tolerance, params: binding })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemoryMode {
    Vertex,
    Grid,
}

fn read_text(path: &Path) -> Result<(String, InputDigest), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::input(path.display(), e))?;
    let digest = InputDigest::of(path.display().to_string(), &bytes);
    let text = String::from_utf8(bytes).map_err(|e| CliError::input(path.display(), e))?;
    Ok((text, digest))
}

fn load_model(path: &Path, report: &mut RunReport) -> Result<InstructionSet, CliError> {
    let (text, digest) = read_text(path)?;
    report.inputs.push(digest);
    parse_model(&text).map_err(|e| match e {
        crate::model_file::FormatError::Model(m) => m.into(),
        other => CliError::input(path.display(), other),
    })
}

fn load_bound(path: &Path, opts: &Options, report: &mut RunReport) -> Result<BoundInstructionSet, CliError> {
    let set = load_model(path, report)?;
    let bound = set.bind(&opts.params)?;
    report.set("model", set.name());
    if !opts.params.is_empty() {
        report.set("parameters", binding_value(&opts.params));
    }
    Ok(bound)
}

fn binding_value(b: &ParameterBinding) -> Value {
    Value::Object(b.iter().map(|(k, v)| (k.clone(), Value::String(format_rational(v)))).collect())
}

fn big(n: &BigUint) -> Value {
    Value::Number(n.to_string().parse().expect("integer literal"))
}

fn solve(set: &BoundInstructionSet, opts: &Options) -> Result<CapacityResult, CliError> {
    Ok(solve_capacity(set, opts.tolerance)?)
}

fn capacity_fields(report: &mut RunReport, cap: &CapacityResult) {
    report.set("capacity_bits", float(cap.capacity_bits));
    report.set("x0", format!("2^{}", crate::report::format_float(cap.capacity_bits).unwrap_or_default()));
    report.set("residual", float(cap.residual));
    report.set("bracket_width", float(cap.bracket_width));
    report.set("iterations", cap.iterations);
}

/// Largest root of the characteristic equation, with the heaviest terms.
pub fn capacity(model: &Path, opts: &Options, command: Vec<String>) -> Result<RunReport, CliError> {
    let mut report = RunReport::new(command);
    let set = load_bound(model, opts, &mut report)?;
    let cap = solve(&set, opts)?;
    capacity_fields(&mut report, &cap);
    report.set("tolerance", float(opts.tolerance));

    let dist = optimal_distribution(&set, &cap);
    let mut terms: Vec<(usize, f64)> = dist.members.iter().map(|m| m.mass).enumerate().collect();
    terms.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let top: Vec<Value> = terms
        .iter()
        .take(10)
        .map(|&(i, mass)| {
            let m = &set.members()[i];
            let mut t = Map::new();
            t.insert("name".into(), m.name().into());
            t.insert("count".into(), big(m.count()));
            t.insert("time".into(), format_rational(m.time()).into());
            t.insert("contribution".into(), float(mass));
            if let Some(p) = m.progression() {
                t.insert("step".into(), format_rational(&p.step).into());
                t.insert("terms".into(), p.terms.into());
            }
            Value::Object(t)
        })
        .collect();
    report.set("top_terms", top);
    if cap.capacity_bits == 0.0 {
        report.warnings.push("the set has a single instruction; capacity is zero".into());
    }
    Ok(report)
}

/// The capacity-achieving distribution.
pub fn distribution(model: &Path, opts: &Options, command: Vec<String>) -> Result<RunReport, CliError> {
    let mut report = RunReport::new(command);
    let set = load_bound(model, opts, &mut report)?;
    let cap = solve(&set, opts)?;
    report.set("capacity_bits", float(cap.capacity_bits));
    let dist = optimal_distribution(&set, &cap);
    let members: Vec<Value> = dist
        .members
        .iter()
        .zip(set.members())
        .map(|(d, m)| {
            let mut o = Map::new();
            o.insert("name".into(), d.name.clone().into());
            o.insert("count".into(), big(m.count()));
            o.insert("time".into(), format_rational(m.time()).into());
            o.insert("mass".into(), float(d.mass));
            o.insert("mean_time".into(), float(d.mean_time));
            o.insert("instruction_probability".into(), float(d.instruction_probability(0)));
            o.insert("log2_instruction_probability".into(), float(d.log2_instruction_probability));
            if let Some(p) = m.progression() {
                o.insert(
                    "family".into(),
                    object([
                        ("step", format_rational(&p.step).into()),
                        ("terms", p.terms.into()),
                        ("log2_term_ratio", float(d.log2_term_ratio)),
                        ("mean_term_index", float(d.mean_term_index)),
                    ]),
                );
            }
            Value::Object(o)
        })
        .collect();
    report.set("members", members);
    report.set("total_mass", float(dist.total_mass()));
    report.set("mean_time", float(dist.mean_time()));
    Ok(report)
}

/// Per-order efficiency estimates from an observed trace.
pub fn efficiency(
    model: &Path,
    trace: &Path,
    order: usize,
    opts: &Options,
    command: Vec<String>,
) -> Result<RunReport, CliError> {
    let mut report = RunReport::new(command);
    let set = load_bound(model, opts, &mut report)?;
    let (text, digest) = read_text(trace)?;
    report.inputs.push(digest);
    let tokens = parse_trace(&text).map_err(|e| CliError::input(trace.display(), e))?;
    let eff = efficiency_from_trace(&set, &tokens, order, opts.tolerance)?;
    report.set("trace_length", eff.length);
    report.set("mean_time", float(eff.mean_time));
    report.set("capacity_bits", float(eff.capacity.capacity_bits));
    let orders: Vec<Value> = eff
        .orders
        .iter()
        .map(|o| {
            object([
                ("order", o.order.into()),
                ("entropy_bits", float(o.entropy_bits)),
                ("efficiency", float(o.efficiency)),
                ("utilization", o.utilization.map_or(Value::Null, float)),
            ])
        })
        .collect();
    report.set("orders", orders);
    let freq: Map<String, Value> = eff.empirical.members.iter().map(|m| (m.name.clone(), float(m.mass))).collect();
    report.set("frequencies", Value::Object(freq));
    Ok(report)
}

/// Exact sequence counts `N(0..=max_time)` and the growth-rate estimate.
pub fn count(model: &Path, max_time: usize, opts: &Options, command: Vec<String>) -> Result<RunReport, CliError> {
    let mut report = RunReport::new(command);
    let set = load_bound(model, opts, &mut report)?;
    let table = count_sequences(&set, max_time)?;
    report.set("max_time", max_time);
    report.set("counts", table.counts().iter().map(|n| Value::String(n.to_string())).collect::<Vec<_>>());
    let cap = solve(&set, opts)?;
    report.set("capacity_bits", float(cap.capacity_bits));
    match table.capacity_estimate(max_time) {
        Ok(est) => {
            report.set("capacity_estimate", float(est));
            report.set("gap", float(est - cap.capacity_bits));
        }
        Err(e @ (CountError::Unreachable(_) | CountError::ZeroTime)) => {
            report.set("capacity_estimate", Value::Null);
            report.warnings.push(e.to_string());
        }
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}

const VERTEX_JUSTIFICATION: &str = "For a fixed root the characteristic sum is linear and increasing in every \
cell count, so the continuous optimum spends the whole budget on the kind with the largest contribution per \
unit cost. Each pure allocation floor(budget/cost) and the empty allocation were solved; ties go to the \
first-declared kind.";

const REFINE_NOTE: &str = " The result was then refined to the best integer allocation by repeated unbounded \
knapsack over cost units at the current root until the root stopped increasing.";

const GRID_JUSTIFICATION: &str = "Every allocation on the grid {0, step, 2*step, ...} per kind within the \
budget was solved; ties go to the lexicographically smallest allocation.";

fn allocation_value(a: &Allocation) -> Value {
    let cells: Map<String, Value> = a.cells.iter().map(|(k, n)| (k.clone(), big(n))).collect();
    object([
        ("cells", Value::Object(cells)),
        ("total_cost", format_rational(&a.total_cost).into()),
        ("capacity_bits", float(a.capacity_bits())),
        ("residual", float(a.capacity.residual)),
    ])
}

fn outcome_fields(report: &mut RunReport, out: &OptimizationOutcome) {
    report.set("best", allocation_value(&out.best));
    report.set("evaluated", out.evaluated);
    report.set("tie", out.tie);
    if out.tie {
        report
            .warnings
            .push(format!("another allocation is within {TIE_THRESHOLD:e} bits of the best; reported as a tie"));
    }
}

/// Chooses memory cell counts under a budget.
pub fn optimize_memory(
    problem: &Path,
    mode: MemoryMode,
    step: u64,
    opts: &Options,
    command: Vec<String>,
) -> Result<RunReport, CliError> {
    let mut report = RunReport::new(command);
    let (text, digest) = read_text(problem)?;
    report.inputs.push(digest);
    let dir = problem.parent().unwrap_or(Path::new("."));
    let file = parse_problem(&text, dir).map_err(|e| match e {
        CliError::Input(msg) => CliError::input(problem.display(), msg),
        other => other,
    })?;
    if let (Some(path), Some(bytes)) = (&file.base_path, &file.base_bytes) {
        report.inputs.push(InputDigest::of(path.display().to_string(), bytes));
    }
    let p = file.build(&opts.params)?;
    report.set("model", p.base().name());
    report.set("registers", big(p.registers()));
    report.set("budget", format_rational(p.budget()));
    report.set("parameters", binding_value(p.binding()));
    match mode {
        MemoryMode::Vertex => {
            let out = p.optimize_vertex(opts.tolerance)?;
            report.set("mode", "vertex");
            outcome_fields(&mut report, &out);
            report.set("refined", out.refined);
            report.set("candidates", out.candidates.iter().map(allocation_value).collect::<Vec<_>>());
            let mut j = VERTEX_JUSTIFICATION.to_string();
            if out.refined {
                j.push_str(REFINE_NOTE);
            }
            report.set("justification", j);
        }
        MemoryMode::Grid => {
            let out = p.optimize_grid(step, opts.tolerance)?;
            report.set("mode", "grid");
            report.set("step", step);
            outcome_fields(&mut report, &out);
            report.set("justification", GRID_JUSTIFICATION);
        }
    }
    Ok(report)
}

