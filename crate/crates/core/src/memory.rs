//! Budgeted choice of memory cell counts that maximises capacity.
//!
//! Each memory kind `i` with `n_i` cells adds, for every access class
//! `(m, τ)`, `R·m·n_i` instructions of time `τ` (`R` registers, one load and
//! one store per register and cell, and so on). The design problem is
//!
//! ```text
//! maximise log₂ X₀  subject to  Σ c_i·n_i ≤ budget,  n_i ≥ 0 integer.
//! ```
//!
//! At a fixed `X` the characteristic sum is linear in every `n_i`, so the
//! continuous relaxation is solved at a vertex of the budget simplex. When the
//! budget is small in units of the costs, the vertex is refined to the exact
//! integer optimum: an allocation `n` is optimal iff it maximises
//! `Σ n_i·w_i(y_n)` over the feasible set, where `w_i(y)` is kind `i`'s
//! per-cell weight at its own root `y_n`. Repeatedly solving that unbounded
//! knapsack strictly increases `y` until it reaches the fixed point.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::model::{check_name, BoundInstructionSet, BoundMember, InstructionSet, ModelError, ParameterBinding, TimeExpression};
use crate::numeric::{log2_biguint, log2_sum_exp2, rational_to_f64};
use crate::rational::{format_rational, Rational};
use crate::solver::{solve_capacity, CapacityResult, SolveError};

/// Allocations whose capacities differ by less than this are tied.
pub const TIE_THRESHOLD: f64 = 1e-11;
pub const MAX_GRID_POINTS: u64 = 1_000_000;
/// Largest budget, in units of the common cost denominator, for which the
/// exact integer refinement runs.
pub const MAX_KNAPSACK_UNITS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MemoryError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("duplicate memory kind {0:?}")]
    DuplicateKind(String),
    #[error("memory kind {0:?} must have a positive cell cost")]
    NonPositiveCost(String),
    #[error("memory kind {0:?} needs at least one access class")]
    NoAccessClasses(String),
    #[error("access class {index} of memory kind {kind:?} must have a positive count")]
    ZeroAccessCount { kind: String, index: usize },
    #[error("register count must be positive")]
    NoRegisters,
    #[error("budget must be non-negative, got {0}")]
    NegativeBudget(String),
    #[error("expected {expected} cell counts, got {got}")]
    CellCountMismatch { expected: usize, got: usize },
    #[error("allocation costs {cost}, over the budget {budget}")]
    OverBudget { cost: String, budget: String },
    #[error("grid step must be positive")]
    ZeroStep,
    #[error("grid has more than {MAX_GRID_POINTS} points")]
    GridTooLarge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessClass {
    /// Instructions per register and cell.
    pub count: BigUint,
    pub time: TimeExpression,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryKind {
    pub name: String,
    pub cell_cost: Rational,
    pub access_classes: Vec<AccessClass>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// `(kind name, n_i)` in declaration order.
    pub cells: Vec<(String, BigUint)>,
    pub total_cost: Rational,
    pub capacity: CapacityResult,
}

impl Allocation {
    pub fn capacity_bits(&self) -> f64 {
        self.capacity.capacity_bits
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationOutcome {
    pub best: Allocation,
    /// Every candidate that was solved, in evaluation order (vertex mode) or
    /// empty (grid mode, which may visit up to a million points).
    pub candidates: Vec<Allocation>,
    pub evaluated: u64,
    /// Another candidate came within [`TIE_THRESHOLD`] of the best.
    pub tie: bool,
    /// Vertex mode only: the exact integer refinement ran.
    pub refined: bool,
}

#[derive(Debug, Clone)]
struct BoundKind {
    /// `(log₂(R·m), R·m, τ)` per access class.
    classes: Vec<(f64, BigUint, Rational)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryDesignProblem {
    base: InstructionSet,
    registers: BigUint,
    kinds: Vec<MemoryKind>,
    budget: Rational,
    binding: ParameterBinding,
}

impl MemoryDesignProblem {
    /// Kinds may reference any parameter bound in `binding`; the base set is
    /// bound with the subset it declares.
    pub fn new(
        base: InstructionSet,
        registers: BigUint,
        kinds: Vec<MemoryKind>,
        budget: Rational,
        binding: ParameterBinding,
    ) -> Result<Self, MemoryError> {
        if registers.is_zero() {
            return Err(MemoryError::NoRegisters);
        }
        if budget.is_negative() {
            return Err(MemoryError::NegativeBudget(format_rational(&budget)));
        }
        let declared: BTreeSet<&str> = binding.iter().map(|(k, _)| k.as_str()).collect();
        let mut seen = BTreeSet::new();
        for kind in &kinds {
            check_name(&kind.name)?;
            if !seen.insert(kind.name.as_str()) {
                return Err(MemoryError::DuplicateKind(kind.name.clone()));
            }
            if !kind.cell_cost.is_positive() {
                return Err(MemoryError::NonPositiveCost(kind.name.clone()));
            }
            if kind.access_classes.is_empty() {
                return Err(MemoryError::NoAccessClasses(kind.name.clone()));
            }
            for (index, class) in kind.access_classes.iter().enumerate() {
                if class.count.is_zero() {
                    return Err(MemoryError::ZeroAccessCount { kind: kind.name.clone(), index });
                }
                class.time.validate(&kind.name, &declared)?;
            }
        }
        let problem = Self { base, registers, kinds, budget, binding };
        // Surface binding problems (missing base parameters, zero times) now.
        problem.bind()?;
        Ok(problem)
    }

    pub fn base(&self) -> &InstructionSet {
        &self.base
    }

    pub fn registers(&self) -> &BigUint {
        &self.registers
    }

    pub fn kinds(&self) -> &[MemoryKind] {
        &self.kinds
    }

    pub fn budget(&self) -> &Rational {
        &self.budget
    }

    pub fn binding(&self) -> &ParameterBinding {
        &self.binding
    }

    /// `floor(budget / c_i)`.
    pub fn max_cells(&self, kind: usize) -> BigUint {
        let q = (&self.budget / &self.kinds[kind].cell_cost).floor().to_integer();
        q.to_biguint().unwrap_or_default()
    }

    /// `Σ c_i·n_i`, exactly.
    pub fn cost(&self, cells: &[BigUint]) -> Rational {
        self.kinds
            .iter()
            .zip(cells)
            .map(|(k, n)| &k.cell_cost * Rational::from_integer(BigInt::from(n.clone())))
            .fold(Rational::zero(), |a, b| a + b)
    }

    fn bind(&self) -> Result<(BoundInstructionSet, Vec<BoundKind>), MemoryError> {
        let base_binding = self.binding.restricted_to(self.base.parameters().iter().map(String::as_str));
        let base = self.base.bind(&base_binding)?;
        let kinds = self
            .kinds
            .iter()
            .map(|kind| {
                let classes = kind
                    .access_classes
                    .iter()
                    .map(|c| {
                        let time = c.time.evaluate(&self.binding)?;
                        if !time.is_positive() {
                            return Err(ModelError::NonPositiveTime {
                                member: kind.name.clone(),
                                time: format_rational(&time),
                            });
                        }
                        let count = &self.registers * &c.count;
                        Ok((log2_biguint(&count), count, time))
                    })
                    .collect::<Result<Vec<_>, ModelError>>()?;
                Ok(BoundKind { classes })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        Ok((base, kinds))
    }

    /// The instruction set of `base` plus `R·m·n_i` instructions of time `τ`
    /// for every kind `i` and access class `(m, τ)`.
    pub fn instantiate(&self, cells: &[BigUint]) -> Result<BoundInstructionSet, MemoryError> {
        let (base, kinds) = self.bind()?;
        self.instantiate_bound(&base, &kinds, cells)
    }

    fn instantiate_bound(
        &self,
        base: &BoundInstructionSet,
        kinds: &[BoundKind],
        cells: &[BigUint],
    ) -> Result<BoundInstructionSet, MemoryError> {
        if cells.len() != self.kinds.len() {
            return Err(MemoryError::CellCountMismatch { expected: self.kinds.len(), got: cells.len() });
        }
        let mut extra = Vec::new();
        for ((kind, bound), n) in self.kinds.iter().zip(kinds).zip(cells) {
            if n.is_zero() {
                continue;
            }
            for (j, (_, count, time)) in bound.classes.iter().enumerate() {
                extra.push(BoundMember::class(alloc::format!("{}/{}", kind.name, j), count * n, time.clone()));
            }
        }
        Ok(base.extended(extra)?)
    }

    fn evaluate(
        &self,
        base: &BoundInstructionSet,
        kinds: &[BoundKind],
        cells: Vec<BigUint>,
        tolerance: f64,
    ) -> Result<Allocation, MemoryError> {
        let total_cost = self.cost(&cells);
        if total_cost > self.budget {
            return Err(MemoryError::OverBudget {
                cost: format_rational(&total_cost),
                budget: format_rational(&self.budget),
            });
        }
        let set = self.instantiate_bound(base, kinds, &cells)?;
        let capacity = solve_capacity(&set, tolerance)?;
        let cells = self.kinds.iter().map(|k| k.name.clone()).zip(cells).collect();
        Ok(Allocation { cells, total_cost, capacity })
    }

    /// Solves the capacity of one explicit allocation.
    pub fn evaluate_allocation(&self, cells: &[BigUint], tolerance: f64) -> Result<Allocation, MemoryError> {
        let (base, kinds) = self.bind()?;
        self.evaluate(&base, &kinds, cells.to_vec(), tolerance)
    }

    /// Best pure allocation (whole budget on one kind), refined to the exact
    /// integer optimum when the budget spans at most
    /// [`MAX_KNAPSACK_UNITS`] cost units.
    pub fn optimize_vertex(&self, tolerance: f64) -> Result<OptimizationOutcome, MemoryError> {
        let (base, kinds) = self.bind()?;
        let k = self.kinds.len();
        let mut candidates = Vec::with_capacity(k + 1);
        for i in 0..k {
            let mut cells = vec![BigUint::zero(); k];
            cells[i] = self.max_cells(i);
            candidates.push(self.evaluate(&base, &kinds, cells, tolerance)?);
        }
        candidates.push(self.evaluate(&base, &kinds, vec![BigUint::zero(); k], tolerance)?);

        let mut best = 0;
        for (i, c) in candidates.iter().enumerate().skip(1) {
            if c.capacity_bits() > candidates[best].capacity_bits() + TIE_THRESHOLD {
                best = i;
            }
        }
        let mut best_alloc = candidates[best].clone();
        let mut evaluated = candidates.len() as u64;

        let refined = match self.knapsack_units() {
            Some(units) => {
                let mut current = best_alloc.clone();
                for _ in 0..64 {
                    let y = current.capacity_bits();
                    let weights: Vec<f64> = kinds
                        .iter()
                        .map(|b| libm::exp2(log2_sum_exp2(b.classes.iter().map(|(l, _, t)| l - rational_to_f64(t) * y))))
                        .collect();
                    let cells = unbounded_knapsack(&units.costs, &weights, units.budget);
                    let cells: Vec<BigUint> = cells.into_iter().map(BigUint::from).collect();
                    if current.cells.iter().map(|(_, n)| n).eq(cells.iter()) {
                        break;
                    }
                    let next = self.evaluate(&base, &kinds, cells, tolerance)?;
                    evaluated += 1;
                    if next.capacity_bits() > y + TIE_THRESHOLD {
                        candidates.push(next.clone());
                        current = next;
                    } else {
                        break;
                    }
                }
                best_alloc = current;
                true
            }
            None => false,
        };

        let tie = candidates.iter().any(|c| {
            c.cells != best_alloc.cells && (c.capacity_bits() - best_alloc.capacity_bits()).abs() < TIE_THRESHOLD
        });
        Ok(OptimizationOutcome { best: best_alloc, candidates, evaluated, tie, refined })
    }

    /// Exhaustive search over `n_i ∈ {0, step, 2·step, …}` within the budget.
    pub fn optimize_grid(&self, step: u64, tolerance: f64) -> Result<OptimizationOutcome, MemoryError> {
        if step == 0 {
            return Err(MemoryError::ZeroStep);
        }
        let (base, kinds) = self.bind()?;
        let k = self.kinds.len();
        let step_r = Rational::from_integer(BigInt::from(step));
        let step_costs: Vec<Rational> = self.kinds.iter().map(|kd| &kd.cell_cost * &step_r).collect();
        if count_grid(&step_costs, &self.budget, MAX_GRID_POINTS + 1) > MAX_GRID_POINTS {
            return Err(MemoryError::GridTooLarge);
        }

        let mut best: Option<Allocation> = None;
        let mut tie = false;
        let mut evaluated = 0u64;
        let mut multiples = vec![0u64; k];
        loop {
            let cells: Vec<BigUint> = multiples.iter().map(|&m| BigUint::from(m) * step).collect();
            let alloc = self.evaluate(&base, &kinds, cells, tolerance)?;
            evaluated += 1;
            match &best {
                Some(b) if alloc.capacity_bits() > b.capacity_bits() + TIE_THRESHOLD => {
                    tie = false;
                    best = Some(alloc);
                }
                Some(b) => {
                    if (alloc.capacity_bits() - b.capacity_bits()).abs() < TIE_THRESHOLD {
                        tie = true;
                    }
                }
                None => best = Some(alloc),
            }
            if !next_grid_point(&mut multiples, &step_costs, &self.budget) {
                break;
            }
        }
        Ok(OptimizationOutcome {
            best: best.expect("the zero allocation is always feasible"),
            candidates: Vec::new(),
            evaluated,
            tie,
            refined: false,
        })
    }

    fn knapsack_units(&self) -> Option<KnapsackUnits> {
        let mut denom = self.budget.denom().clone();
        for kind in &self.kinds {
            denom = denom.lcm(kind.cell_cost.denom());
        }
        let scale = Rational::from_integer(denom);
        let budget = (&self.budget * &scale).floor().to_integer().to_u64()?;
        if budget > MAX_KNAPSACK_UNITS {
            return None;
        }
        let costs = self
            .kinds
            .iter()
            .map(|kd| (&kd.cell_cost * &scale).to_integer().to_u64())
            .collect::<Option<Vec<u64>>>()?;
        Some(KnapsackUnits { costs, budget })
    }
}

struct KnapsackUnits {
    costs: Vec<u64>,
    budget: u64,
}

/// Maximises `Σ n_i·values_i` subject to `Σ n_i·costs_i ≤ budget`; ties go to
/// the lowest-index kind.
fn unbounded_knapsack(costs: &[u64], values: &[f64], budget: u64) -> Vec<u64> {
    const NONE: usize = usize::MAX;
    let w = budget as usize;
    let mut best = vec![0.0f64; w + 1];
    let mut choice = vec![NONE; w + 1];
    for cap in 1..=w {
        best[cap] = best[cap - 1];
        for (i, (&c, &v)) in costs.iter().zip(values).enumerate() {
            let c = c as usize;
            if c <= cap && best[cap - c] + v > best[cap] {
                best[cap] = best[cap - c] + v;
                choice[cap] = i;
            }
        }
    }
    let mut cells = vec![0u64; costs.len()];
    let mut cap = w;
    while cap > 0 {
        match choice[cap] {
            NONE => cap -= 1,
            i => {
                cells[i] += 1;
                cap -= costs[i] as usize;
            }
        }
    }
    cells
}

/// Number of grid points, stopping once `limit` is reached.
fn count_grid(step_costs: &[Rational], budget: &Rational, limit: u64) -> u64 {
    fn go(costs: &[Rational], left: &Rational, limit: u64) -> u64 {
        match costs.split_first() {
            None => 1,
            Some((c, [])) => (left / c).floor().to_integer().to_u64().map_or(limit, |n| n.saturating_add(1)),
            Some((c, rest)) => {
                let mut total = 0u64;
                let mut spent = Rational::zero();
                while &spent <= left {
                    total += go(rest, &(left - &spent), limit - total.min(limit));
                    if total >= limit {
                        return total;
                    }
                    spent += c;
                }
                total
            }
        }
    }
    go(step_costs, budget, limit)
}

/// Advances `multiples` to the next feasible point in lexicographic order
/// (last kind fastest). Returns false after the last point.
fn next_grid_point(multiples: &mut [u64], step_costs: &[Rational], budget: &Rational) -> bool {
    for i in (0..multiples.len()).rev() {
        multiples[i] += 1;
        let cost = multiples
            .iter()
            .zip(step_costs)
            .map(|(&m, c)| c * Rational::from_integer(BigInt::from(m)))
            .fold(Rational::zero(), |a, b| a + b);
        if &cost <= budget {
            return true;
        }
        multiples[i] = 0;
    }
    false
}

impl MemoryKind {
    pub fn new(name: impl Into<String>, cell_cost: Rational, access_classes: Vec<AccessClass>) -> Self {
        Self { name: name.into(), cell_cost, access_classes }
    }
}

impl AccessClass {
    pub fn new(count: impl Into<BigUint>, time: TimeExpression) -> Self {
        Self { count: count.into(), time }
    }
}
