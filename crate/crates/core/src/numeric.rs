//! Floating-point kernels working in the base-2 log domain.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;

const LN_2: f64 = core::f64::consts::LN_2;

/// `log₂ n` for an arbitrary-size integer, from its top 64 bits.
///
/// Relative error is bounded by the f64 rounding of the mantissa (about
/// 1e-16). Returns `-∞` for zero.
pub fn log2_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return libm::log2(n.to_u64().expect("fits in 64 bits") as f64);
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().expect("top 64 bits");
    libm::log2(top as f64) + shift as f64
}

/// Converts an exact rational to the nearest f64.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `log₂ Σ 2^eᵢ` with the maximum shifted out first.
pub fn log2_sum_exp2(exponents: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = exponents.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    let sum: f64 = exponents.into_iter().map(|e| libm::exp2(e - max)).sum();
    max + libm::log2(sum)
}

/// `log₂ Σ_{F=0}^{terms-1} 2^(−F·x)` for `x ≥ 0`, i.e. the log of the
/// geometric factor `(1 − r^terms)/(1 − r)` with `r = 2^(−x)`.
///
/// Uses `expm1` so the ratio stays accurate as `r → 1`; at `x = 0` the
/// factor is exactly `terms`.
pub fn log2_geometric(terms: f64, x: f64) -> f64 {
    if terms <= 1.0 {
        return 0.0;
    }
    if x == 0.0 {
        return libm::log2(terms);
    }
    let u = x * LN_2;
    let numer = -libm::expm1(-terms * u);
    let denom = -libm::expm1(-u);
    (libm::log(numer) - libm::log(denom)) / LN_2
}

/// Mean index `E[F]` under weights `2^(−F·x)`, `F = 0 … terms-1`.
///
/// This is `−d/dx log₂(geometric factor)` and gives the family derivative.
pub fn geometric_mean_index(terms: f64, x: f64) -> f64 {
    if terms <= 1.0 {
        return 0.0;
    }
    let u = x * LN_2;
    if terms * u < 1e-5 {
        // E[F] = (M−1)/2 − u·(M²−1)/12 + O(u²·M³)
        return (terms - 1.0) / 2.0 - u * (terms * terms - 1.0) / 12.0;
    }
    1.0 / libm::expm1(u) - terms / libm::expm1(terms * u)
}
