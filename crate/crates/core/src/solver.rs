//! The characteristic function `g(y) = Σ_x 2^(−τ(x)·y)` and its unique root.
//!
//! Capacity is the `y*` with `g(y*) = 1`, i.e. `log₂` of the largest real
//! root `X₀` of `Σ_x X^(−τ(x)) = 1`. Every quantity is carried as a base-2
//! exponent so that counts near `2^50` and roots near `2^31` stay in range.
//!
//! `log₂ g` is a log-sum-exp of affine functions of `y`, hence convex and
//! strictly decreasing. A Newton step from the left end of the bracket never
//! passes the root, and the chord across the bracket never falls short of
//! it, so both ends tighten every round. Bisection takes over whenever a
//! round fails to halve the bracket.

use thiserror::Error;

use crate::model::{BoundInstructionSet, BoundMember};
use crate::numeric::{geometric_mean_index, log2_geometric, log2_sum_exp2};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const MIN_TOLERANCE: f64 = 1e-13;
pub const MAX_TOLERANCE: f64 = 1e-6;
/// Bound on `|g(y*) − 1|` for a successful solve.
pub const RESIDUAL_BOUND: f64 = 1e-10;
const MAX_ITERATIONS: u32 = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("tolerance {0} outside [1e-13, 1e-6]")]
    InvalidTolerance(f64),
    #[error("root finder did not converge after {iterations} iterations (bracket [{lo}, {hi}])")]
    NoConvergence { iterations: u32, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityResult {
    /// `log₂ X₀`, bits per time unit.
    pub capacity_bits: f64,
    /// `|g(capacity_bits) − 1|`.
    pub residual: f64,
    pub bracket_width: f64,
    pub iterations: u32,
}

/// `log₂` of the member's contribution to `g(y)` and its `y`-derivative.
pub(crate) fn member_log2_weight(m: &BoundMember, y: f64) -> (f64, f64) {
    let mut e = m.log2_count - m.time_f64 * y;
    let mut slope = -m.time_f64;
    if m.is_family() {
        let x = m.step_f64 * y;
        e += log2_geometric(m.terms_f64, x);
        slope -= m.step_f64 * geometric_mean_index(m.terms_f64, x);
    }
    (e, slope)
}

/// Mean execution time of a member's instructions when each is weighted by
/// `2^(−τ·y)`.
pub(crate) fn member_mean_time(m: &BoundMember, y: f64) -> f64 {
    if m.is_family() {
        m.time_f64 + m.step_f64 * geometric_mean_index(m.terms_f64, m.step_f64 * y)
    } else {
        m.time_f64
    }
}

/// `log₂ g(y)`.
pub fn log2_characteristic(set: &BoundInstructionSet, y: f64) -> f64 {
    log2_sum_exp2(set.members().iter().map(|m| member_log2_weight(m, y).0))
}

/// `g(y) = Σ count·2^(−τ·y)` with closed-form family sums.
pub fn eval_characteristic(set: &BoundInstructionSet, y: f64) -> f64 {
    libm::exp2(log2_characteristic(set, y))
}

/// `g′(y) = −ln 2 · Σ τ·count·2^(−τ·y)`.
pub fn characteristic_derivative(set: &BoundInstructionSet, y: f64) -> f64 {
    let (h, dh) = log2_characteristic_with_slope(set, y);
    libm::exp2(h) * core::f64::consts::LN_2 * dh
}

/// `(log₂ g(y), d/dy log₂ g(y))`.
fn log2_characteristic_with_slope(set: &BoundInstructionSet, y: f64) -> (f64, f64) {
    let mut max = f64::NEG_INFINITY;
    for m in set.members() {
        max = max.max(member_log2_weight(m, y).0);
    }
    let mut sum = 0.0;
    let mut slope = 0.0;
    for m in set.members() {
        let (e, s) = member_log2_weight(m, y);
        let w = libm::exp2(e - max);
        sum += w;
        slope += w * s;
    }
    (max + libm::log2(sum), slope / sum)
}

/// Solves `g(y) = 1` for `y ≥ 0`.
pub fn solve_capacity(set: &BoundInstructionSet, tolerance: f64) -> Result<CapacityResult, SolveError> {
    if !(MIN_TOLERANCE..=MAX_TOLERANCE).contains(&tolerance) {
        return Err(SolveError::InvalidTolerance(tolerance));
    }
    let residual_of = |h: f64| libm::fabs(libm::expm1(h * core::f64::consts::LN_2));

    let (h0, dh0) = log2_characteristic_with_slope(set, 0.0);
    if h0 <= 0.0 {
        // A single instruction: g(0) = 1.
        return Ok(CapacityResult {
            capacity_bits: 0.0,
            residual: residual_of(h0),
            bracket_width: 0.0,
            iterations: 0,
        });
    }

    let mut iterations = 0u32;
    let (mut lo, mut h_lo, mut dh_lo) = (0.0f64, h0, dh0);
    let mut hi = 1.0f64;
    let mut h_hi = log2_characteristic(set, hi);
    while h_hi > 0.0 {
        iterations += 1;
        if iterations > MAX_ITERATIONS || !hi.is_finite() {
            return Err(SolveError::NoConvergence { iterations, lo, hi });
        }
        lo = hi;
        let (h, dh) = log2_characteristic_with_slope(set, lo);
        h_lo = h;
        dh_lo = dh;
        hi *= 2.0;
        h_hi = log2_characteristic(set, hi);
    }
    if h_hi == 0.0 {
        return Ok(CapacityResult { capacity_bits: hi, residual: 0.0, bracket_width: 0.0, iterations });
    }

    loop {
        let width = hi - lo;
        let best_h = if h_lo.abs() <= h_hi.abs() { h_lo } else { h_hi };
        let adjacent = next_up(lo) >= hi;
        if (width <= tolerance && residual_of(best_h) <= RESIDUAL_BOUND) || adjacent {
            let y = if h_lo.abs() <= h_hi.abs() { lo } else { hi };
            return Ok(CapacityResult {
                capacity_bits: y,
                residual: residual_of(best_h),
                bracket_width: width,
                iterations,
            });
        }
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(SolveError::NoConvergence { iterations, lo, hi });
        }

        // Newton from the left end.
        if dh_lo < 0.0 {
            let x = lo - h_lo / dh_lo;
            if x > lo && x < hi {
                let (h, dh) = log2_characteristic_with_slope(set, x);
                if h > 0.0 {
                    (lo, h_lo, dh_lo) = (x, h, dh);
                } else if h < 0.0 {
                    (hi, h_hi) = (x, h);
                } else {
                    return Ok(CapacityResult { capacity_bits: x, residual: 0.0, bracket_width: 0.0, iterations });
                }
            }
        }
        // Chord across the bracket.
        let x = lo + h_lo * (hi - lo) / (h_lo - h_hi);
        if x > lo && x < hi {
            let (h, dh) = log2_characteristic_with_slope(set, x);
            if h > 0.0 {
                (lo, h_lo, dh_lo) = (x, h, dh);
            } else if h < 0.0 {
                (hi, h_hi) = (x, h);
            } else {
                return Ok(CapacityResult { capacity_bits: x, residual: 0.0, bracket_width: 0.0, iterations });
            }
        }
        if hi - lo > 0.5 * width {
            let mid = lo + 0.5 * (hi - lo);
            let (h, dh) = log2_characteristic_with_slope(set, mid);
            if h > 0.0 {
                (lo, h_lo, dh_lo) = (mid, h, dh);
            } else if h < 0.0 {
                (hi, h_hi) = (mid, h);
            } else {
                return Ok(CapacityResult { capacity_bits: mid, residual: 0.0, bracket_width: 0.0, iterations });
            }
        }
    }
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BoundMember;
    use crate::rational::Rational;
    use alloc::vec;
    use num_bigint::BigInt;

    fn int(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    fn toy() -> BoundInstructionSet {
        BoundInstructionSet::from_classes(&[(2, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn characteristic_values() {
        assert!((eval_characteristic(&toy(), 1.0) - 1.25).abs() < 1e-15);
        let fam = BoundInstructionSet::new(
            "f",
            vec![BoundMember::family("f", 1u32, int(1), int(2), 3)],
        )
        .unwrap();
        assert!((eval_characteristic(&fam, 1.0) - 0.65625).abs() < 1e-15);
        // Family factor at y = 0 is the term count.
        assert_eq!(eval_characteristic(&fam, 0.0), 3.0);
        let y = libm::log2(1.0 + libm::sqrt(2.0));
        assert!((eval_characteristic(&toy(), y) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let set = BoundInstructionSet::new(
            "mixed",
            vec![
                BoundMember::class("a", 5u32, int(1)),
                BoundMember::family("f", 3u32, int(2), int(3), 40),
            ],
        )
        .unwrap();
        for &y in &[0.05, 0.3, 1.0, 2.5] {
            let h = 1e-6;
            let fd = (eval_characteristic(&set, y + h) - eval_characteristic(&set, (y - h).max(0.0)))
                / (y + h - (y - h).max(0.0));
            let an = characteristic_derivative(&set, y);
            assert!((fd - an).abs() <= 1e-5 * an.abs(), "{y}: {fd} vs {an}");
        }
    }

    #[test]
    fn two_equal_instructions() {
        let r = solve_capacity(&BoundInstructionSet::from_classes(&[(2, 1)]).unwrap(), DEFAULT_TOLERANCE)
            .unwrap();
        assert!((r.capacity_bits - 1.0).abs() <= 1e-12);
        assert!(r.residual <= RESIDUAL_BOUND);
    }

    #[test]
    fn single_instruction_has_zero_capacity() {
        let r = solve_capacity(&BoundInstructionSet::from_classes(&[(1, 5)]).unwrap(), DEFAULT_TOLERANCE)
            .unwrap();
        assert_eq!(r.capacity_bits, 0.0);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn toy_root() {
        let r = solve_capacity(&toy(), DEFAULT_TOLERANCE).unwrap();
        let expected = libm::log2(1.0 + libm::sqrt(2.0));
        assert!((r.capacity_bits - expected).abs() <= 1e-12, "{r:?}");
        assert!(r.bracket_width <= DEFAULT_TOLERANCE);
        assert!(r.residual <= RESIDUAL_BOUND);
    }

    #[test]
    fn loose_tolerance_still_meets_residual() {
        let r = solve_capacity(&toy(), 1e-6).unwrap();
        assert!(r.residual <= RESIDUAL_BOUND);
        assert!(r.bracket_width <= 1e-6);
    }

    #[test]
    fn tolerance_range_checked() {
        assert_eq!(solve_capacity(&toy(), 1e-3), Err(SolveError::InvalidTolerance(1e-3)));
        assert_eq!(solve_capacity(&toy(), 1e-14), Err(SolveError::InvalidTolerance(1e-14)));
    }

    #[test]
    fn rational_times() {
        // 2 instructions of time 1/2: X^(1/2) = 2, capacity 2.
        let set = BoundInstructionSet::new(
            "half",
            vec![BoundMember::class("a", 2u32, Rational::new(BigInt::from(1), BigInt::from(2)))],
        )
        .unwrap();
        let r = solve_capacity(&set, DEFAULT_TOLERANCE).unwrap();
        assert!((r.capacity_bits - 2.0).abs() < 1e-12);
    }
}
