//! Exact count `N(T)` of instruction sequences whose times add up to `T`.
//!
//! `N(0) = 1`, `N(T) = Σ_τ m(τ)·N(T−τ)` with `m(τ)` the number of
//! instructions of time `τ`. `log₂ N(T) / T` tends to the capacity.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::model::BoundInstructionSet;
use crate::numeric::log2_biguint;
use crate::rational::format_rational;

pub const MAX_TIME: usize = 100_000;
pub const MAX_DISTINCT_TIMES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("member {member:?} has non-integer time {time}; multiply all times by {rescale} to count in integer units")]
    NonIntegerTime { member: alloc::string::String, time: alloc::string::String, rescale: BigUint },
    #[error("max_time {0} exceeds the limit of {MAX_TIME}")]
    MaxTimeTooLarge(usize),
    #[error("more than {MAX_DISTINCT_TIMES} distinct (time, multiplicity) pairs")]
    TooManyTimes,
    #[error("time {0} is outside the table")]
    OutOfRange(usize),
    #[error("no instruction sequence takes exactly {0} time units")]
    Unreachable(usize),
    #[error("capacity estimate needs T ≥ 1")]
    ZeroTime,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    counts: Vec<BigUint>,
}

impl CountTable {
    pub fn max_time(&self) -> usize {
        self.counts.len() - 1
    }

    /// `N(t)` for `t ≤ max_time`.
    pub fn get(&self, t: usize) -> Option<&BigUint> {
        self.counts.get(t)
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    /// `log₂ N(T) / T`.
    pub fn capacity_estimate(&self, t: usize) -> Result<f64, CountError> {
        if t == 0 {
            return Err(CountError::ZeroTime);
        }
        let n = self.counts.get(t).ok_or(CountError::OutOfRange(t))?;
        if n.is_zero() {
            return Err(CountError::Unreachable(t));
        }
        Ok(log2_biguint(n) / t as f64)
    }
}

/// Total multiplicity of each integer time `≤ max_time`.
fn multiplicities(
    set: &BoundInstructionSet,
    max_time: usize,
) -> Result<BTreeMap<usize, BigUint>, CountError> {
    let non_integer = |member: &str, time: &num_rational::BigRational| CountError::NonIntegerTime {
        member: member.into(),
        time: format_rational(time),
        rescale: set.time_denominator_lcm(),
    };
    let mut m: BTreeMap<usize, BigUint> = BTreeMap::new();
    for member in set.members() {
        let base = member.time();
        if !base.is_integer() {
            return Err(non_integer(member.name(), base));
        }
        let base = base.to_integer().to_usize().unwrap_or(usize::MAX);
        match member.progression() {
            None => {
                if base <= max_time {
                    *m.entry(base).or_default() += member.count();
                }
            }
            Some(p) => {
                if !p.step.is_integer() {
                    return Err(non_integer(member.name(), &p.step));
                }
                let step = p.step.to_integer().to_usize().unwrap_or(usize::MAX);
                // Terms beyond max_time cannot contribute.
                let mut k = 0u64;
                while k < p.terms {
                    let t = match (k as usize).checked_mul(step).and_then(|d| d.checked_add(base)) {
                        Some(t) if t <= max_time => t,
                        _ => break,
                    };
                    *m.entry(t).or_default() += member.count();
                    k += 1;
                }
            }
        }
        if m.len() > MAX_DISTINCT_TIMES {
            return Err(CountError::TooManyTimes);
        }
    }
    Ok(m)
}

/// Fills `N(0..=max_time)` exactly.
pub fn count_sequences(set: &BoundInstructionSet, max_time: usize) -> Result<CountTable, CountError> {
    if max_time > MAX_TIME {
        return Err(CountError::MaxTimeTooLarge(max_time));
    }
    let weights: Vec<(usize, BigUint)> = multiplicities(set, max_time)?.into_iter().collect();
    let mut counts: Vec<BigUint> = Vec::with_capacity(max_time + 1);
    counts.push(BigUint::from(1u32));
    for t in 1..=max_time {
        let mut n = BigUint::zero();
        for (tau, mult) in &weights {
            if *tau > t {
                break;
            }
            let prev = &counts[t - tau];
            if !prev.is_zero() {
                n += mult * prev;
            }
        }
        counts.push(n);
    }
    Ok(CountTable { counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BoundMember;
    use crate::rational::Rational;
    use alloc::vec;
    use num_bigint::BigInt;

    fn table(set: &[(u64, u64)], max: usize) -> Vec<u64> {
        let set = BoundInstructionSet::from_classes(set).unwrap();
        count_sequences(&set, max).unwrap().counts().iter().map(|n| n.to_u64().unwrap()).collect()
    }

    #[test]
    fn one_sequence_per_length() {
        assert_eq!(table(&[(1, 1)], 5), vec![1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn toy_counts() {
        assert_eq!(table(&[(2, 1), (1, 2)], 4), vec![1, 2, 5, 12, 29]);
        assert_eq!(table(&[(2, 1), (1, 2)], 0), vec![1]);
    }

    #[test]
    fn estimates() {
        let set = BoundInstructionSet::from_classes(&[(1, 1)]).unwrap();
        let t = count_sequences(&set, 10).unwrap();
        assert_eq!(t.capacity_estimate(7).unwrap(), 0.0);
        assert_eq!(t.capacity_estimate(0), Err(CountError::ZeroTime));
        assert_eq!(t.capacity_estimate(11), Err(CountError::OutOfRange(11)));

        let set = BoundInstructionSet::from_classes(&[(1, 2)]).unwrap();
        let t = count_sequences(&set, 4).unwrap();
        assert_eq!(t.capacity_estimate(3), Err(CountError::Unreachable(3)));
        assert_eq!(t.capacity_estimate(4).unwrap(), 0.0);
    }

    #[test]
    fn toy_estimate_at_64() {
        let set = BoundInstructionSet::from_classes(&[(2, 1), (1, 2)]).unwrap();
        let t = count_sequences(&set, 64).unwrap();
        let c = libm::log2(1.0 + libm::sqrt(2.0));
        assert!((t.capacity_estimate(64).unwrap() - c).abs() <= 0.01);
    }

    #[test]
    fn families_expand() {
        let int = |n: i64| Rational::from_integer(BigInt::from(n));
        let fam = BoundInstructionSet::new("f", vec![BoundMember::family("f", 1u32, int(1), int(2), 3)]).unwrap();
        let flat = BoundInstructionSet::from_classes(&[(1, 1), (1, 3), (1, 5)]).unwrap();
        assert_eq!(count_sequences(&fam, 30).unwrap(), count_sequences(&flat, 30).unwrap());
    }

    #[test]
    fn rejects_fractional_times() {
        let set = BoundInstructionSet::new(
            "r",
            vec![
                BoundMember::class("a", 1u32, Rational::new(BigInt::from(3), BigInt::from(2))),
                BoundMember::class("b", 1u32, Rational::new(BigInt::from(1), BigInt::from(3))),
            ],
        )
        .unwrap();
        match count_sequences(&set, 10) {
            Err(CountError::NonIntegerTime { rescale, .. }) => assert_eq!(rescale, BigUint::from(6u32)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn limits() {
        let set = BoundInstructionSet::from_classes(&[(1, 1)]).unwrap();
        assert_eq!(count_sequences(&set, MAX_TIME + 1), Err(CountError::MaxTimeTooLarge(MAX_TIME + 1)));
    }
}
