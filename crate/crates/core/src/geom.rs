//! Intervals and cubes with exact rational endpoints.

use std::fmt;

use num_traits::Signed;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::num::{format_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo >= hi {
            return Err(Error::Domain(format!(
                "empty interval ({}, {})",
                format_rational(&lo),
                format_rational(&hi)
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// `x ∈ [lo, hi]`.
    pub fn contains_closed(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = if self.lo > other.lo { &self.lo } else { &other.lo };
        let hi = if self.hi < other.hi { &self.hi } else { &other.hi };
        Interval::new(lo.clone(), hi.clone()).ok()
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", format_rational(&self.lo), format_rational(&self.hi))
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(2))?;
        seq.serialize_element(&format_rational(&self.lo))?;
        seq.serialize_element(&format_rational(&self.hi))?;
        seq.end()
    }
}

/// Axis-parallel cube `Π [lo_i, lo_i + side]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cube {
    pub lo: Vec<Rational>,
    pub side: Rational,
}

impl Cube {
    pub fn new(lo: Vec<Rational>, side: Rational) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::Domain("cube of dimension 0".into()));
        }
        if !side.is_positive() {
            return Err(Error::Domain("cube side must be positive".into()));
        }
        Ok(Cube { lo, side })
    }

    pub fn unit(n: usize) -> Self {
        Cube { lo: vec![Rational::from_integer(0.into()); n], side: Rational::from_integer(1.into()) }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn axis(&self, i: usize) -> Interval {
        Interval { lo: self.lo[i].clone(), hi: &self.lo[i] + &self.side }
    }

    pub fn volume(&self) -> Rational {
        num_traits::pow::Pow::pow(&self.side, self.dim() as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    #[test]
    fn interval_basics() {
        let i = Interval::new(rat(0, 1), rat(1, 1)).unwrap();
        assert_eq!(i.length(), rat(1, 1));
        assert!(Interval::new(rat(1, 1), rat(1, 1)).is_err());
        let j = Interval::new(rat(1, 2), rat(2, 1)).unwrap();
        assert_eq!(i.intersect(&j), Some(Interval::new(rat(1, 2), rat(1, 1)).unwrap()));
        assert_eq!(serde_json::to_string(&j).unwrap(), r#"["1/2","2"]"#);
    }

    #[test]
    fn cube_volume() {
        let c = Cube::new(vec![rat(0, 1), rat(1, 1)], rat(1, 2)).unwrap();
        assert_eq!(c.volume(), rat(1, 4));
        assert_eq!(c.axis(1).hi, rat(3, 2));
    }
}
