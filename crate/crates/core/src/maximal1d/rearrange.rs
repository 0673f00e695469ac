//! Decreasing rearrangements, distribution functions and weak-type norms.

use super::profile::Profile;
use crate::error::{Error, Result};
use crate::geom::Interval;
use crate::num::{to_f64, Rational, Real, Scalar};
use crate::weight::StepWeight;

/// The left-continuous decreasing rearrangement of `w·1_I` on `(0, |I|)`.
pub fn rearrangement(w: &StepWeight, i: &Interval) -> Result<StepWeight> {
    let r = w.restrict(i)?;
    let mut parts: Vec<(Rational, Rational)> = r.pieces().map(|(a, b, v)| (v.clone(), b - a)).collect();
    parts.sort_by(|x, y| y.0.cmp(&x.0));
    let mut bps = vec![Rational::from_integer(0.into())];
    let mut vals: Vec<Rational> = Vec::new();
    for (v, len) in parts {
        let end = bps.last().expect("nonempty") + len;
        if vals.last() == Some(&v) {
            *bps.last_mut().expect("nonempty") = end;
        } else {
            vals.push(v);
            bps.push(end);
        }
    }
    StepWeight::new(bps, vals)
}

/// `|{x ∈ I : w(x) > λ}|`.
pub fn weight_distribution(w: &StepWeight, i: &Interval, lambda: &Rational) -> Result<Rational> {
    let r = w.restrict(i)?;
    Ok(r.pieces().filter(|(_, _, v)| *v > lambda).map(|(a, b, _)| b - a).sum())
}

/// `sup_λ λ (|{w > λ}|/|I|)^{1/r}`; `r = ∞` gives the essential supremum.
pub fn weak_lorentz_norm(w: &StepWeight, i: &Interval, r: f64) -> Result<Real> {
    if !(r > 1.0) {
        return Err(Error::Domain(format!("weak-type exponent must exceed 1, got {r}")));
    }
    let rw = w.restrict(i)?;
    if r.is_infinite() || rw.is_constant() {
        return Ok(Real::from_rational(rw.max_value()));
    }
    let len = to_f64(&i.length());
    let mut best = 0.0f64;
    for (_, _, v) in rw.pieces() {
        let ge: Rational = rw.pieces().filter(|(_, _, u)| *u >= v).map(|(a, b, _)| b - a).sum();
        best = best.max(to_f64(v) * (to_f64(&ge) / len).powf(1.0 / r));
    }
    Ok(Real::approx(best))
}

impl<S: Scalar> Profile<S> {
    /// `|{x ∈ [a, b] : p(x) > λ}|` (or `≥ λ` when `inclusive`) in floating point.
    pub fn distribution_f64(&self, a: f64, b: f64, lambda: f64, inclusive: bool) -> f64 {
        let above = |y: f64| if inclusive { y >= lambda } else { y > lambda };
        let mut total = 0.0;
        for s in &self.segments {
            let (lo, hi) = (s.lo.to_f64().max(a), s.hi.to_f64().min(b));
            if hi <= lo {
                continue;
            }
            let (v, k, q) = (s.v.to_f64(), s.k.to_f64(), s.q.to_f64());
            let g = |x: f64| if k == 0.0 { v } else { v + k / (q - x) };
            let (gl, gh) = (g(lo), g(hi));
            total += match (above(gl), above(gh)) {
                (true, true) => hi - lo,
                (false, false) => 0.0,
                (left_high, _) => {
                    let x = (q - k / (lambda - v)).clamp(lo, hi);
                    if left_high {
                        x - lo
                    } else {
                        hi - x
                    }
                }
            };
        }
        total
    }

    /// `∫` of the profile over `{p > λ} ∩ [a, b]`.
    pub fn superlevel_integral_f64(&self, a: f64, b: f64, lambda: f64) -> f64 {
        let mut total = 0.0;
        for s in &self.segments {
            let (lo, hi) = (s.lo.to_f64().max(a), s.hi.to_f64().min(b));
            if hi <= lo {
                continue;
            }
            let (v, k, q) = (s.v.to_f64(), s.k.to_f64(), s.q.to_f64());
            let seg = super::Segment { lo, hi, v, q, k };
            let (gl, gh) = (seg.eval(&lo), seg.eval(&hi));
            let (x0, x1) = match (gl > lambda, gh > lambda) {
                (true, true) => (lo, hi),
                (false, false) => continue,
                (true, false) => (lo, (q - k / (lambda - v)).clamp(lo, hi)),
                (false, true) => ((q - k / (lambda - v)).clamp(lo, hi), hi),
            };
            total += seg.integral(&x0, &x1);
        }
        total
    }

    /// Left-continuous decreasing rearrangement of the profile on `[a, b]`
    /// at `t ∈ (0, b − a]`: `inf{λ : |{p > λ}| < t}`, by bisection.
    pub fn rearranged_f64(&self, a: f64, b: f64, t: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, self.sup().to_f64());
        if self.distribution_f64(a, b, lo, false) < t {
            return 0.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.distribution_f64(a, b, mid, false) < t {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// `∫₀^t p*` for the rearrangement on `[a, b]`.
    pub fn rearranged_integral_f64(&self, a: f64, b: f64, t: f64) -> f64 {
        let l = self.rearranged_f64(a, b, t);
        let d = self.distribution_f64(a, b, l, false);
        self.superlevel_integral_f64(a, b, l) + (t - d).max(0.0) * l
    }

    /// `sup_λ λ (|{p > λ} ∩ [a,b]|/(b − a))^{1/r}` over the profile restricted
    /// to `[a, b]`: exact candidates at critical levels plus a refined search
    /// inside each band.
    pub fn weak_norm_f64(&self, a: f64, b: f64, r: f64) -> f64 {
        let len = b - a;
        let mut levels: Vec<f64> = Vec::new();
        for s in &self.segments {
            let (lo, hi) = (s.lo.to_f64().max(a), s.hi.to_f64().min(b));
            if hi <= lo {
                continue;
            }
            let (v, k, q) = (s.v.to_f64(), s.k.to_f64(), s.q.to_f64());
            for x in [lo, hi] {
                levels.push(if k == 0.0 { v } else { v + k / (q - x) });
            }
        }
        levels.sort_by(|x, y| x.total_cmp(y));
        levels.dedup();
        if r.is_infinite() {
            return levels.last().copied().unwrap_or(0.0);
        }
        let phi = |l: f64, inclusive: bool| l * (self.distribution_f64(a, b, l, inclusive) / len).powf(1.0 / r);
        let mut best = levels.iter().map(|&l| phi(l, true)).fold(0.0, f64::max);
        for pair in levels.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let samples = 24;
            let mut arg = lo;
            let mut val = f64::NEG_INFINITY;
            for t in 1..samples {
                let l = lo + (hi - lo) * t as f64 / samples as f64;
                let y = phi(l, false);
                if y > val {
                    val = y;
                    arg = l;
                }
            }
            let step = (hi - lo) / samples as f64;
            let (mut x0, mut x1) = ((arg - step).max(lo), (arg + step).min(hi));
            let g = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..60 {
                let (m0, m1) = (x1 - g * (x1 - x0), x0 + g * (x1 - x0));
                if phi(m0, false) >= phi(m1, false) {
                    x1 = m1;
                } else {
                    x0 = m0;
                }
            }
            best = best.max(val).max(phi(0.5 * (x0 + x1), false));
        }
        best
    }
}
