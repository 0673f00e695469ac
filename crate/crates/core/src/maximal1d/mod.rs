//! One-dimensional maximal operators `M`, `M⁺`, `M⁻` and `M⁻₍₂₎` on step
//! weights: pointwise evaluation, exact profiles, level sets and
//! rearrangements.
//!
//! For fixed `b` the average `a ↦ (F(b) − F(a))/(b − a)` is monotone while
//! `a` stays inside one constant piece (its derivative has the sign of the
//! average minus the piece value, which cannot change there). Hence every
//! supremum is attained with both endpoints in `{x} ∪ breakpoints`.

pub mod hull;
pub mod levelset;
pub mod mminus2;
pub mod profile;
pub mod rearrange;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geom::Interval;
use crate::num::{format_rational, Rational};
use crate::weight::StepWeight;

pub use levelset::{profile_distribution, rising_sun_minus, rising_sun_two_sided, superlevel_set, Component, LevelSetDecomposition};
pub use mminus2::eval_mminus2;
pub use profile::{integrate_profile, maximal_profile, maximal_profile_window, Form, MaximalProfile, Profile, Segment};
pub use rearrange::{rearrangement, weak_lorentz_norm};

/// Which maximal operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    /// Two-sided: all intervals containing `x`.
    M,
    /// Forward: intervals `(x, x + h)`.
    MPlus,
    /// Backward: intervals `(x − h, x)`.
    MMinus,
}

impl Op {
    pub fn uses_left(self) -> bool {
        matches!(self, Op::M | Op::MMinus)
    }

    pub fn uses_right(self) -> bool {
        matches!(self, Op::M | Op::MPlus)
    }

    pub fn tag(self) -> &'static str {
        match self {
            Op::M => "M",
            Op::MPlus => "Mplus",
            Op::MMinus => "Mminus",
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Op {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m" => Ok(Op::M),
            "mplus" | "m+" => Ok(Op::MPlus),
            "mminus" | "m-" => Ok(Op::MMinus),
            _ => Err(Error::Parse(format!("unknown operator {s:?}; expected m, mplus or mminus"))),
        }
    }
}

/// `op(w·1_I)(x)` for `x ∈ closure(I)`, by enumerating candidate intervals.
pub fn eval_maximal(w: &StepWeight, i: &Interval, op: Op, x: &Rational) -> Result<Rational> {
    if !i.contains_closed(x) {
        return Err(Error::Domain(format!("point {} is outside {}", format_rational(x), i)));
    }
    eval_maximal_ambient(w, i, op, x)
}

/// `op(w·1_I)(x)` for any real `x`.
pub fn eval_maximal_ambient(w: &StepWeight, i: &Interval, op: Op, x: &Rational) -> Result<Rational> {
    let r = w.restrict(i)?;
    let mut cands: Vec<&Rational> = r.breakpoints().iter().collect();
    cands.push(x);
    let avg = |a: &Rational, b: &Rational| (r.cumulative(b) - r.cumulative(a)) / (b - a);
    let mut best = Rational::from_integer(0.into());
    let mut consider = |a: &Rational, b: &Rational| {
        if a < b {
            let v = avg(a, b);
            if v > best {
                best = v;
            }
        }
    };
    match op {
        Op::M => {
            for a in cands.iter().filter(|a| **a <= x) {
                for b in cands.iter().filter(|b| **b >= x) {
                    consider(a, b);
                }
            }
        }
        Op::MMinus => {
            for a in cands.iter().filter(|a| **a < x) {
                consider(a, x);
            }
        }
        Op::MPlus => {
            for b in cands.iter().filter(|b| **b > x) {
                consider(x, b);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};

    pub(crate) fn two_step() -> StepWeight {
        StepWeight::new(vec![int(0), rat(1, 2), int(1)], vec![int(1), int(3)]).unwrap()
    }

    #[test]
    fn worked_values() {
        let w = two_step();
        let i = w.support();
        assert_eq!(eval_maximal(&w, &i, Op::M, &int(0)).unwrap(), int(2));
        assert_eq!(eval_maximal(&w, &i, Op::M, &int(1)).unwrap(), int(3));
        assert_eq!(eval_maximal(&w, &i, Op::M, &rat(1, 4)).unwrap(), rat(7, 3));
        assert!(eval_maximal(&w, &i, Op::M, &int(2)).is_err());
        assert_eq!(eval_maximal_ambient(&w, &i, Op::M, &int(2)).unwrap(), int(1));
    }

    #[test]
    fn constant_weight_interior_points() {
        let w = StepWeight::new(vec![int(0), int(2)], vec![rat(5, 2)]).unwrap();
        let i = w.support();
        for op in [Op::M, Op::MPlus, Op::MMinus] {
            for x in [rat(1, 3), int(1), rat(3, 2)] {
                assert_eq!(eval_maximal(&w, &i, op, &x).unwrap(), rat(5, 2));
            }
        }
        // the one-sided operators vanish at their outer endpoint
        assert_eq!(eval_maximal(&w, &i, Op::MMinus, &int(0)).unwrap(), int(0));
        assert_eq!(eval_maximal(&w, &i, Op::MPlus, &int(2)).unwrap(), int(0));
        assert_eq!(eval_maximal(&w, &i, Op::M, &int(0)).unwrap(), rat(5, 2));
    }

    #[test]
    fn op_parsing() {
        assert_eq!("Mminus".parse::<Op>().unwrap(), Op::MMinus);
        assert!("max".parse::<Op>().is_err());
    }
}
