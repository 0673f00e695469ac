//! Scalars: exact rationals, tolerance-tracked reals, and the [`Scalar`]
//! abstraction shared by the exact and floating evaluation paths.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or `"p"` (optional leading minus).
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("malformed rational {s:?}: expected \"p/q\" or an integer"));
    let parse_int = |x: &str| -> Result<BigInt> {
        let digits = x.strip_prefix('-').unwrap_or(x);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        x.parse::<BigInt>().map_err(|_| bad())
    };
    match t.split_once('/') {
        Some((p, q)) => {
            let p = parse_int(p)?;
            let q = parse_int(q)?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(parse_int(t)?)),
    }
}

/// Canonical text form: lowest terms, `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact binary expansion of a finite float.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::Domain(format!("non-finite value {x}")))
}

pub fn rpow(base: &Rational, e: i32) -> Rational {
    num_traits::pow::Pow::pow(base, e)
}

/// Integer value of `r` if it is an integer small enough to use as an exponent.
pub fn as_small_int(r: f64) -> Option<i32> {
    if r.is_finite() && r.fract() == 0.0 && r.abs() <= 64.0 {
        Some(r as i32)
    } else {
        None
    }
}

/// A float that remembers whether it was promoted from an exact rational.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Real {
    pub value: f64,
    pub exact: bool,
}

impl Real {
    pub fn approx(value: f64) -> Self {
        Real { value, exact: false }
    }

    pub fn from_rational(r: &Rational) -> Self {
        Real { value: to_f64(r), exact: true }
    }

    pub fn infinity() -> Self {
        Real { value: f64::INFINITY, exact: true }
    }
}

/// Relative tolerance used by every inexact comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub relative: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { relative: 1e-9 }
    }
}

impl Tolerance {
    pub fn new(relative: f64) -> Self {
        Tolerance { relative }
    }

    /// `lhs ≤ rhs·(1 + tol)`.
    pub fn le(&self, lhs: f64, rhs: f64) -> bool {
        lhs <= rhs * (1.0 + self.relative) || lhs <= rhs
    }
}

/// Ordered field used by the generic profile and hull code. Implemented for
/// [`Rational`] (exact) and `f64` (fast sweeps).
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn from_i64(n: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn sign(&self) -> i32;
    fn is_zero_value(&self) -> bool {
        self.sign() == 0
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_i64(n: i64) -> Self {
        int(n)
    }
    fn to_f64(&self) -> f64 {
        to_f64(self)
    }
    fn sign(&self) -> i32 {
        if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        }
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        to_f64(r)
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sign(&self) -> i32 {
        if *self > 0.0 {
            1
        } else if *self < 0.0 {
            -1
        } else {
            0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        assert_eq!(parse_rational("2/4").unwrap(), rat(1, 2));
        assert_eq!(format_rational(&parse_rational("2/4").unwrap()), "1/2");
        assert_eq!(format_rational(&parse_rational("-6/3").unwrap()), "-2");
        assert_eq!(format_rational(&parse_rational("7").unwrap()), "7");
        assert_eq!(parse_rational("3/-4").unwrap(), rat(-3, 4));
    }

    #[test]
    fn parse_rejects_garbage() {
        for s in ["", "1/0", "a", "1.5", "1/", "/2", "--1", "1/2/3"] {
            assert!(parse_rational(s).is_err(), "{s}");
        }
    }

    #[test]
    fn tolerance_policy() {
        let t = Tolerance::default();
        assert!(t.le(1.0 + 5e-10, 1.0));
        assert!(!t.le(1.0 + 2e-9, 1.0));
        assert!(t.le(-2.0, -1.0));
    }

    #[test]
    fn float_round_trip_is_exact() {
        let x = 0.1f64;
        assert_eq!(to_f64(&from_f64(x).unwrap()), x);
        assert!(from_f64(f64::NAN).is_err());
    }
}
