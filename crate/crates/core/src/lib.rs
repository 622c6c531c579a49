//! Information-theoretic capacity and efficiency of a computer, computed from
//! a declarative model of its instruction set.
//!
//! A computer is modelled as an alphabet of instructions, each with an
//! execution time. If every instruction sequence is an admissible program,
//! the number of sequences that run in exactly `T` time units grows like
//! `X₀^T`, where `X₀` is the largest real root of
//!
//! ```text
//! Σ_x X^(−τ(x)) = 1
//! ```
//!
//! and the capacity is `log₂ X₀` bits per time unit. This crate provides:
//!
//! * [`model`]: instruction classes, arithmetic-progression families,
//!   parameterised execution times and parameter binding;
//! * [`solver`]: the characteristic function and its root;
//! * [`distribution`]: the capacity-achieving distribution and efficiency;
//! * [`trace`]: k-gram statistics and plug-in entropy of observed streams;
//! * [`counting`]: an exact big-integer count of sequences by total time;
//! * [`memory`]: budgeted choice of memory cell counts.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod counting;
pub mod distribution;
pub mod memory;
pub mod model;
pub mod numeric;
pub mod rational;
pub mod solver;
pub mod trace;

pub use counting::{count_sequences, CountError, CountTable};
pub use distribution::{efficiency, DistributionError, optimal_distribution, InstructionDistribution, MemberMass};
pub use memory::{
    Allocation, AccessClass, MemoryDesignProblem, MemoryError, MemoryKind, OptimizationOutcome,
};
pub use model::{
    BoundInstructionSet, BoundMember, InstructionClass, InstructionFamily, InstructionSet, Member,
    ModelError, ParameterBinding, Progression, TimeExpression,
};
pub use rational::{parse_count, parse_rational, ParseError, Rational};
pub use solver::{eval_characteristic, solve_capacity, CapacityResult, SolveError, DEFAULT_TOLERANCE};
pub use trace::{efficiency_from_trace, EfficiencyReport, OrderEstimate, TraceError, TraceStatistics, TraceToken};
