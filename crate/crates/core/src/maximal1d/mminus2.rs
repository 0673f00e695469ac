//! The localized second iteration `M⁻₍₂₎`.

use super::hull::Pieces;
use super::profile::build_segments;
use super::Op;
use crate::constants::RefinementGrid;
use crate::error::{Error, Result};
use crate::geom::Interval;
use crate::num::{format_rational, Rational, Real};
use crate::weight::StepWeight;

/// `(1/(x − s)) ∫_s^x M⁻(w·1_(s,x))` in floating point.
pub fn mminus_window_average(w: &StepWeight, s: &Rational, x: &Rational) -> Result<f64> {
    let r = w.restrict(&Interval::new(s.clone(), x.clone())?)?;
    let (pts, vals) = r.to_f64_parts();
    let p = Pieces::new(pts, vals);
    let total: f64 = build_segments(&p, Op::MMinus).iter().map(|seg| seg.integral(&seg.lo, &seg.hi)).sum();
    Ok(total / (crate::num::to_f64(x) - crate::num::to_f64(s)))
}

/// `M⁻₍₂₎(w·1_I)(x)` as a lower bound: the outer supremum over `h` runs over
/// left endpoints `x − h` on the refinement grid of `w` at `depth`, clipped
/// to `[lo(I), x)`. Left endpoints below `lo(I)` only dilute the average.
///
/// Exact only when `w` is constant on `(lo(I), x)`.
pub fn eval_mminus2(w: &StepWeight, i: &Interval, x: &Rational, depth: u32) -> Result<(Real, Option<Rational>)> {
    if !i.contains_closed(x) {
        return Err(Error::Domain(format!("point {} is outside {}", format_rational(x), i)));
    }
    if x == &i.lo {
        return Ok((Real::from_rational(&Rational::from_integer(0.into())), None));
    }
    let left = w.restrict(&Interval::new(i.lo.clone(), x.clone())?)?;
    if left.is_constant() {
        return Ok((Real::from_rational(left.max_value()), Some(i.lo.clone())));
    }
    let mut base: Vec<Rational> = w.breakpoints().to_vec();
    base.extend([i.lo.clone(), i.hi.clone(), x.clone()]);
    let grid = RefinementGrid::new(base, depth);
    let mut best = f64::NEG_INFINITY;
    let mut arg = None;
    for s in grid.points().into_iter().filter(|s| s >= &i.lo && s < x) {
        let v = mminus_window_average(w, &s, x)?;
        if v > best {
            best = v;
            arg = Some(s);
        }
    }
    Ok((Real::approx(best), arg))
}
