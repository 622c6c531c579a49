//! Exact scalar syntax shared by model files, parameter flags and traces.
//!
//! Rationals are written as integers (`3`), decimals (`1.4`, `2.5e-3`) or
//! fractions (`7/4`). Counts are non-negative integers, optionally written as
//! `a*2^b` or `2^b`.

use alloc::string::{String, ToString};
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use thiserror::Error;

/// Exact rational number used for times, costs and parameter values.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at byte {position} of {input:?}")]
pub struct ParseError {
    pub input: String,
    pub position: usize,
    pub message: &'static str,
}

impl ParseError {
    fn new(input: &str, position: usize, message: &'static str) -> Self {
        Self { input: input.to_string(), position, message }
    }
}

fn parse_digits(input: &str, s: &str, offset: usize) -> Result<BigUint, ParseError> {
    if s.is_empty() {
        return Err(ParseError::new(input, offset, "expected digits"));
    }
    if let Some(i) = s.bytes().position(|b| !b.is_ascii_digit()) {
        return Err(ParseError::new(input, offset + i, "unexpected character"));
    }
    Ok(BigUint::parse_bytes(s.as_bytes(), 10).expect("validated digits"))
}

fn parse_decimal(input: &str, s: &str, offset: usize) -> Result<Rational, ParseError> {
    let (negative, body, body_off) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..], offset + 1),
        Some(b'+') => (false, &s[1..], offset + 1),
        _ => (false, s, offset),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => {
            let exp_str = &body[i + 1..];
            let (exp_neg, digits, d_off) = match exp_str.as_bytes().first() {
                Some(b'-') => (true, &exp_str[1..], body_off + i + 2),
                Some(b'+') => (false, &exp_str[1..], body_off + i + 2),
                _ => (false, exp_str, body_off + i + 1),
            };
            let e = parse_digits(input, digits, d_off)?;
            let e: i64 = i64::try_from(e)
                .ok()
                .filter(|e| *e <= 4096)
                .ok_or_else(|| ParseError::new(input, d_off, "exponent out of range"))?;
            (&body[..i], if exp_neg { -e } else { e })
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(ParseError::new(input, body_off, "expected a number"));
    }
    let mut digits = String::with_capacity(int_part.len() + frac_part.len());
    digits.push_str(int_part);
    digits.push_str(frac_part);
    let numer = parse_digits(input, &digits, body_off)
        .map_err(|e| ParseError { position: body_off, ..e })?;
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let mut value = Rational::from_integer(BigInt::from(numer));
    if scale >= 0 {
        value *= Rational::from_integer(Pow::pow(&ten, scale as u64));
    } else {
        value /= Rational::from_integer(Pow::pow(&ten, (-scale) as u64));
    }
    Ok(if negative { -value } else { value })
}

/// Parses `p/q`, an integer, or a decimal (with optional exponent) exactly.
pub fn parse_rational(input: &str) -> Result<Rational, ParseError> {
    let s = input.trim();
    let offset = input.len() - input.trim_start().len();
    match s.find('/') {
        Some(i) => {
            let numer = parse_decimal(input, &s[..i], offset)?;
            let denom = parse_decimal(input, &s[i + 1..], offset + i + 1)?;
            if denom.is_zero() {
                return Err(ParseError::new(input, offset + i + 1, "zero denominator"));
            }
            Ok(numer / denom)
        }
        None => parse_decimal(input, s, offset),
    }
}

/// Parses a non-negative integer written as `n`, `a*2^b` or `2^b`.
pub fn parse_count(input: &str) -> Result<BigUint, ParseError> {
    let s = input.trim();
    let offset = input.len() - input.trim_start().len();
    let (factor, power, power_off) = match s.find('*') {
        Some(i) => (Some((&s[..i], offset)), &s[i + 1..], offset + i + 1),
        None => (None, s, offset),
    };
    let power = power.trim_start();
    let value = match power.strip_prefix("2^") {
        Some(exp) => {
            let exp_off = power_off + 2;
            let e = parse_digits(input, exp.trim_end(), exp_off)?;
            let e = u32::try_from(e)
                .ok()
                .filter(|e| *e <= 4096)
                .ok_or_else(|| ParseError::new(input, exp_off, "exponent out of range"))?;
            BigUint::one() << e
        }
        None if factor.is_some() => {
            return Err(ParseError::new(input, power_off, "expected 2^b after '*'"));
        }
        None => parse_digits(input, power, power_off)?,
    };
    match factor {
        Some((a, a_off)) => Ok(parse_digits(input, a.trim(), a_off)? * value),
        None => Ok(value),
    }
}

/// Canonical text for a rational: `p` for integers, `p/q` otherwise.
pub fn format_rational(r: &Rational) -> String {
    DisplayRational(r).to_string()
}

/// `Display` adapter for [`Rational`] in the canonical `p` / `p/q` form.
pub struct DisplayRational<'a>(pub &'a Rational);

impl fmt::Display for DisplayRational<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

pub(crate) fn is_non_negative(r: &Rational) -> bool {
    !r.is_negative()
}
