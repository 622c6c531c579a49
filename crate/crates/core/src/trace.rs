//! Statistics of observed instruction streams and trace-based efficiency.
//!
//! k-grams are counted over cyclic windows: the trace is treated as one
//! period of a periodic sequence, so every order has exactly `length`
//! windows. That makes the empirical k-gram frequencies the marginals of a
//! single stationary process, and the plug-in entropies `ĥ_n` are then
//! non-increasing in `n` for every trace, not just on average.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::distribution::{efficiency, InstructionDistribution, MemberMass};
use crate::model::BoundInstructionSet;
use crate::numeric::rational_to_f64;
use crate::rational::{format_rational, parse_rational, ParseError, Rational};
use crate::solver::{solve_capacity, CapacityResult, SolveError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("trace is empty")]
    Empty,
    #[error("trace of length {length} is too short for order {order}")]
    TooShort { length: usize, order: usize },
    #[error("order {0} was not collected")]
    OrderNotCollected(usize),
    #[error("trace symbol {0:?} does not name a member of the instruction set")]
    UnknownSymbol(String),
    #[error("family {0:?} needs an explicit time annotation (name@time)")]
    FamilyNeedsTime(String),
    #[error("time in {0:?} is not an execution time of that member")]
    TimeMismatch(String),
    #[error("bad trace token: {0}")]
    BadToken(#[from] ParseError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// One trace token, `name` or `name@time`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceToken {
    pub name: String,
    pub time: Option<Rational>,
}

impl TraceToken {
    pub fn parse(token: &str) -> Result<Self, TraceError> {
        match token.split_once('@') {
            Some((name, time)) => {
                if name.is_empty() {
                    return Err(TraceError::UnknownSymbol(token.to_string()));
                }
                Ok(Self { name: name.to_string(), time: Some(parse_rational(time)?) })
            }
            None => Ok(Self { name: token.to_string(), time: None }),
        }
    }

    /// Canonical spelling, used as the entropy alphabet symbol.
    pub fn symbol(&self) -> String {
        match &self.time {
            Some(t) => alloc::format!("{}@{}", self.name, format_rational(t)),
            None => self.name.clone(),
        }
    }
}

/// Overlapping (cyclic) k-gram counts of a symbol stream.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStatistics {
    alphabet: Vec<String>,
    length: usize,
    kgram_counts: Vec<BTreeMap<Vec<u32>, u64>>,
}

impl TraceStatistics {
    /// Counts j+1-grams for every `j ≤ max_order`.
    pub fn new<S: AsRef<str>>(
        symbols: impl IntoIterator<Item = S>,
        max_order: usize,
    ) -> Result<Self, TraceError> {
        let symbols: Vec<S> = symbols.into_iter().collect();
        if symbols.is_empty() {
            return Err(TraceError::Empty);
        }
        if symbols.len() < max_order + 1 {
            return Err(TraceError::TooShort { length: symbols.len(), order: max_order });
        }
        let mut alphabet: Vec<String> = symbols.iter().map(|s| s.as_ref().to_string()).collect();
        alphabet.sort();
        alphabet.dedup();
        let ids: Vec<u32> = symbols
            .iter()
            .map(|s| alphabet.binary_search_by(|a| a.as_str().cmp(s.as_ref())).expect("in alphabet") as u32)
            .collect();
        let n = ids.len();
        let kgram_counts = (0..=max_order)
            .map(|j| {
                let mut counts = BTreeMap::new();
                for start in 0..n {
                    let gram: Vec<u32> = (0..=j).map(|k| ids[(start + k) % n]).collect();
                    *counts.entry(gram).or_insert(0u64) += 1;
                }
                counts
            })
            .collect();
        Ok(Self { alphabet, length: n, kgram_counts })
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn max_order(&self) -> usize {
        self.kgram_counts.len() - 1
    }

    /// Counts of (order+1)-grams, keyed by alphabet indices.
    pub fn kgram_counts(&self, order: usize) -> Option<&BTreeMap<Vec<u32>, u64>> {
        self.kgram_counts.get(order)
    }

    /// Relative frequency of each alphabet symbol.
    pub fn frequencies(&self) -> impl Iterator<Item = (&str, f64)> {
        self.kgram_counts[0]
            .iter()
            .map(move |(g, &c)| (self.alphabet[g[0] as usize].as_str(), c as f64 / self.length as f64))
    }

    /// Plug-in `ĥ_n = −(1/(n+1)) Σ_u P(u) log₂ P(u)` over (n+1)-grams.
    pub fn entropy(&self, order: usize) -> Result<f64, TraceError> {
        let counts = self.kgram_counts.get(order).ok_or(TraceError::OrderNotCollected(order))?;
        let total = self.length as f64;
        let h: f64 = counts
            .values()
            .map(|&c| {
                let p = c as f64 / total;
                -p * libm::log2(p)
            })
            .sum();
        // Round-off can leave -0.0 or a hair above log₂|A| for degenerate inputs.
        Ok((h / (order + 1) as f64).max(0.0))
    }
}

/// `ĥ_j`, `ĉ_j = ĥ_j / mean time`, and `ĉ_j / C` for one order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderEstimate {
    pub order: usize,
    pub entropy_bits: f64,
    pub efficiency: f64,
    /// `None` when capacity is zero.
    pub utilization: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyReport {
    pub length: usize,
    pub mean_time: f64,
    pub capacity: CapacityResult,
    /// Order-0 empirical distribution over members.
    pub empirical: InstructionDistribution,
    pub orders: Vec<OrderEstimate>,
}

/// Resolves each token to an execution time of its member.
fn resolve_time(set: &BoundInstructionSet, token: &TraceToken) -> Result<Rational, TraceError> {
    let member = set
        .member(&token.name)
        .ok_or_else(|| TraceError::UnknownSymbol(token.symbol()))?;
    match (&token.time, member.is_family()) {
        (None, true) => Err(TraceError::FamilyNeedsTime(token.name.clone())),
        (None, false) => Ok(member.time().clone()),
        (Some(t), _) => member
            .term_index(t)
            .map(|_| t.clone())
            .ok_or_else(|| TraceError::TimeMismatch(token.symbol())),
    }
}

/// Estimates efficiency at orders `0..=max_order` from an observed stream.
pub fn efficiency_from_trace(
    set: &BoundInstructionSet,
    trace: &[TraceToken],
    max_order: usize,
    tolerance: f64,
) -> Result<EfficiencyReport, TraceError> {
    if trace.is_empty() {
        return Err(TraceError::Empty);
    }
    let mut per_member: BTreeMap<&str, (u64, f64)> = BTreeMap::new();
    for token in trace {
        let t = rational_to_f64(&resolve_time(set, token)?);
        let e = per_member.entry(token.name.as_str()).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += t;
    }
    let stats = TraceStatistics::new(trace.iter().map(TraceToken::symbol), max_order)?;
    let length = trace.len();

    let empirical = InstructionDistribution {
        members: set
            .members()
            .iter()
            .filter_map(|m| {
                per_member.get(m.name()).map(|&(count, time_sum)| {
                    let mass = count as f64 / length as f64;
                    MemberMass {
                        name: m.name().to_string(),
                        mass,
                        mean_time: time_sum / count as f64,
                        log2_instruction_probability: libm::log2(mass) - m.log2_count,
                        log2_term_ratio: 0.0,
                        mean_term_index: 0.0,
                    }
                })
            })
            .collect(),
    };
    let mean_time = empirical.mean_time();
    let capacity = solve_capacity(set, tolerance)?;

    let mut orders = Vec::with_capacity(max_order + 1);
    for j in 0..=max_order {
        let entropy_bits = stats.entropy(j)?;
        let eff = efficiency(set, &empirical, entropy_bits).expect("members resolved above");
        let utilization = (capacity.capacity_bits > 0.0).then(|| eff / capacity.capacity_bits);
        orders.push(OrderEstimate { order: j, entropy_bits, efficiency: eff, utilization });
    }
    Ok(EfficiencyReport { length, mean_time, capacity, empirical, orders })
}
