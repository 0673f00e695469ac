//! Piecewise closed-form representation of `M`, `M⁺`, `M⁻` of a step function.
//!
//! On a piece `(u, u')` with value `v`, every candidate average with one
//! endpoint at `x` has the form `v + K/(q − x)` where `q` is the other
//! endpoint and `K = F(q) − F(u) − v(q − u)`. `K = 0` is the constant `v`.
//! Two candidates on the same piece differ by a ratio whose numerator is
//! linear in `x`, so envelope crossings are roots of linear equations.

use std::fmt;

use serde::{Serialize, Serializer};

use super::hull::Pieces;
use super::Op;
use crate::error::{Error, Result};
use crate::geom::Interval;
use crate::num::{format_rational, Rational, Scalar};
use crate::weight::StepWeight;

/// `x ↦ v + k/(q − x)` on the open interval `(lo, hi)`; constant `v` when `k = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment<S> {
    pub lo: S,
    pub hi: S,
    pub v: S,
    pub q: S,
    pub k: S,
}

/// Closed form of a segment.
#[derive(Clone, Debug, PartialEq)]
pub enum Form {
    Const(Rational),
    /// `x ↦ (α − v·x)/(q − x)`.
    Moebius { alpha: Rational, v: Rational, q: Rational },
}

impl<S: Scalar> Segment<S> {
    pub fn is_const(&self) -> bool {
        self.k.is_zero_value()
    }

    pub fn eval(&self, x: &S) -> S {
        if self.is_const() {
            self.v.clone()
        } else {
            self.v.clone() + self.k.clone() / (self.q.clone() - x.clone())
        }
    }

    /// `∫_a^b` of the segment function, `lo ≤ a ≤ b ≤ hi`.
    pub fn integral(&self, a: &S, b: &S) -> f64 {
        let len = (b.clone() - a.clone()).to_f64();
        if self.is_const() {
            return self.v.to_f64() * len;
        }
        // ln((q − a)/(q − b)) = ln(1 + (b − a)/(q − b))
        let ratio = len / (self.q.clone() - b.clone()).to_f64();
        self.v.to_f64() * len + self.k.to_f64() * ratio.ln_1p()
    }

    /// `∫_a^b g^r` by adaptive Gauss–Legendre quadrature.
    pub fn power_integral(&self, a: &S, b: &S, r: f64, abs_tol: f64) -> f64 {
        let len = (b.clone() - a.clone()).to_f64();
        if self.is_const() {
            return self.v.to_f64().powf(r) * len;
        }
        let v = self.v.to_f64();
        let k = self.k.to_f64();
        let d = (self.q.clone() - a.clone()).to_f64();
        crate::quad::adaptive(&|y: f64| (v + k / (d - y)).powf(r), 0.0, len, abs_tol)
    }
}

impl Segment<Rational> {
    pub fn interval(&self) -> Interval {
        Interval { lo: self.lo.clone(), hi: self.hi.clone() }
    }

    pub fn form(&self) -> Form {
        if self.is_const() {
            Form::Const(self.v.clone())
        } else {
            Form::Moebius { alpha: &self.v * &self.q + &self.k, v: self.v.clone(), q: self.q.clone() }
        }
    }
}

/// A maximal function of `w·1_I` on a domain `⊇ I`.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile<S> {
    pub op: Op,
    pub source: (S, S),
    pub domain: (S, S),
    pub segments: Vec<Segment<S>>,
}

pub type MaximalProfile = Profile<Rational>;

struct Cand<S> {
    q: S,
    k: S,
    sigma: i32,
}

/// Sign of `g_c − g_d` just to the right of `x` (or at `x` when they differ there).
fn cmp_right<S: Scalar>(c: &Cand<S>, d: &Cand<S>, x: &S) -> i32 {
    let n = c.k.clone() * (d.q.clone() - x.clone()) - d.k.clone() * (c.q.clone() - x.clone());
    let s = n.sign();
    let s = if s != 0 { s } else { (d.k.clone() - c.k.clone()).sign() };
    s * c.sigma * d.sigma
}

fn envelope_piece<S: Scalar>(u: &S, u2: &S, v: &S, cands: &[Cand<S>], out: &mut Vec<Segment<S>>) {
    let mut best = 0;
    for i in 1..cands.len() {
        if cmp_right(&cands[i], &cands[best], u) > 0 {
            best = i;
        }
    }
    let mut cur = u.clone();
    let cap = 4 * cands.len() + 8;
    for _ in 0..cap {
        let b = &cands[best];
        let mut next: Option<(S, usize)> = None;
        for (i, c) in cands.iter().enumerate() {
            if i == best {
                continue;
            }
            let dk = c.k.clone() - b.k.clone();
            if dk.is_zero_value() {
                continue;
            }
            // overtakes iff the numerator's sign after the root favours c
            if c.sigma * b.sigma * (-dk.sign()) <= 0 {
                continue;
            }
            let t = (c.k.clone() * b.q.clone() - b.k.clone() * c.q.clone()) / dk;
            if t <= cur || t >= *u2 {
                continue;
            }
            next = match next {
                None => Some((t, i)),
                Some((t0, i0)) => {
                    if t < t0 || (t == t0 && cmp_right(c, &cands[i0], &t) > 0) {
                        Some((t, i))
                    } else {
                        Some((t0, i0))
                    }
                }
            };
        }
        let b = &cands[best];
        match next {
            None => {
                push_segment(out, Segment { lo: cur, hi: u2.clone(), v: v.clone(), q: b.q.clone(), k: b.k.clone() });
                return;
            }
            Some((t, i)) => {
                push_segment(out, Segment { lo: cur, hi: t.clone(), v: v.clone(), q: b.q.clone(), k: b.k.clone() });
                cur = t;
                best = i;
            }
        }
    }
    let b = &cands[best];
    push_segment(out, Segment { lo: cur, hi: u2.clone(), v: v.clone(), q: b.q.clone(), k: b.k.clone() });
}

fn push_segment<S: Scalar>(out: &mut Vec<Segment<S>>, seg: Segment<S>) {
    if let Some(last) = out.last_mut() {
        let same = if last.is_const() && seg.is_const() {
            last.v == seg.v
        } else {
            last.v == seg.v && last.k == seg.k && last.q == seg.q
        };
        if same && last.hi == seg.lo {
            last.hi = seg.hi;
            return;
        }
    }
    out.push(seg);
}

/// Builds the profile of `op` applied to the step function `p` (zero outside
/// `p`'s range) on the whole range of `p`.
pub fn build_segments<S: Scalar>(p: &Pieces<S>, op: Op) -> Vec<Segment<S>> {
    let n = p.len();
    let left = op.uses_left().then(|| p.lower_hull_snapshots());
    let right = op.uses_right().then(|| p.upper_hull_snapshots());
    let mut out = Vec::with_capacity(2 * n);
    let mut cands: Vec<Cand<S>> = Vec::new();
    for j in 0..n {
        let (u, u2, v) = (&p.pts[j], &p.pts[j + 1], &p.vals[j]);
        cands.clear();
        let kval = |q: usize| p.cum[q].clone() - p.cum[j].clone() - v.clone() * (p.pts[q].clone() - u.clone());
        if let Some((off, flat)) = &left {
            for &a in &flat[off[j]..off[j + 1]] {
                let k = if a == j { S::zero() } else { kval(a) };
                cands.push(Cand { q: p.pts[a].clone(), k, sigma: -1 });
            }
        }
        if let Some((off, flat)) = &right {
            for &b in &flat[off[j + 1]..off[j + 2]] {
                let k = if b == j + 1 { S::zero() } else { kval(b) };
                cands.push(Cand { q: p.pts[b].clone(), k, sigma: 1 });
            }
        }
        envelope_piece(u, u2, v, &cands, &mut out);
    }
    out
}

impl<S: Scalar> Profile<S> {
    pub fn from_pieces(p: &Pieces<S>, op: Op, source: (S, S)) -> Self {
        let domain = (p.pts[0].clone(), p.pts[p.len()].clone());
        Profile { op, source, domain, segments: build_segments(p, op) }
    }

    fn locate(&self, x: &S) -> usize {
        self.segments.partition_point(|s| s.hi <= *x).min(self.segments.len() - 1)
    }

    /// Pointwise value with the operator's convention at segment boundaries:
    /// `M` is continuous, `M⁻` is left-continuous and `M⁺` right-continuous.
    /// At the outer end of a one-sided operator the value is `0`.
    pub fn eval(&self, x: &S) -> S {
        let segs = &self.segments;
        let i = self.locate(x);
        let s = &segs[i];
        if *x > s.lo && *x < s.hi {
            return s.eval(x);
        }
        let at_lo = *x <= s.lo;
        match self.op {
            Op::MMinus => {
                if at_lo && i == 0 {
                    if *x <= self.source.0 {
                        S::zero()
                    } else {
                        s.eval(x)
                    }
                } else if at_lo {
                    segs[i - 1].eval(x)
                } else {
                    s.eval(x)
                }
            }
            Op::MPlus => {
                if !at_lo && i + 1 == segs.len() {
                    if *x >= self.source.1 {
                        S::zero()
                    } else {
                        s.eval(x)
                    }
                } else if !at_lo {
                    segs[i + 1].eval(x)
                } else {
                    s.eval(x)
                }
            }
            Op::M => s.eval(x),
        }
    }

    /// Left and right limits at `x`.
    pub fn limits(&self, x: &S) -> (S, S) {
        let i = self.locate(x);
        let s = &self.segments[i];
        if *x > s.lo && *x < s.hi {
            let y = s.eval(x);
            return (y.clone(), y);
        }
        if *x <= s.lo {
            let l = if i > 0 { self.segments[i - 1].eval(x) } else { s.eval(x) };
            (l, s.eval(x))
        } else {
            let r = if i + 1 < self.segments.len() { self.segments[i + 1].eval(x) } else { s.eval(x) };
            (s.eval(x), r)
        }
    }

    /// `∫_a^b` of the profile, `[a, b] ⊆ domain`.
    pub fn integrate(&self, a: &S, b: &S) -> f64 {
        let mut total = 0.0;
        for s in &self.segments {
            if s.hi <= *a || s.lo >= *b {
                continue;
            }
            let lo = if s.lo > *a { &s.lo } else { a };
            let hi = if s.hi < *b { &s.hi } else { b };
            total += s.integral(lo, hi);
        }
        total
    }

    /// `∫_a^b p^r` with absolute error budget `abs_tol`.
    pub fn power_integral(&self, a: &S, b: &S, r: f64, abs_tol: f64) -> f64 {
        let active: Vec<&Segment<S>> = self.segments.iter().filter(|s| s.hi > *a && s.lo < *b).collect();
        let share = abs_tol / active.len().max(1) as f64;
        active
            .iter()
            .map(|s| {
                let lo = if s.lo > *a { &s.lo } else { a };
                let hi = if s.hi < *b { &s.hi } else { b };
                s.power_integral(lo, hi, r, share)
            })
            .sum()
    }

    /// Segment boundaries, left to right, including both domain ends.
    pub fn boundaries(&self) -> Vec<S> {
        let mut v: Vec<S> = self.segments.iter().map(|s| s.lo.clone()).collect();
        v.push(self.domain.1.clone());
        v
    }

    /// Supremum of the profile over its domain.
    pub fn sup(&self) -> S {
        let mut best = S::zero();
        for s in &self.segments {
            for y in [s.eval(&s.lo), s.eval(&s.hi)] {
                if y > best {
                    best = y;
                }
            }
        }
        best
    }
}

impl MaximalProfile {
    pub fn source_interval(&self) -> Interval {
        Interval { lo: self.source.0.clone(), hi: self.source.1.clone() }
    }

    pub fn domain_interval(&self) -> Interval {
        Interval { lo: self.domain.0.clone(), hi: self.domain.1.clone() }
    }

    pub fn integrate_over(&self, j: &Interval) -> Result<f64> {
        if !self.domain_interval().contains_interval(j) {
            return Err(Error::Domain(format!("{} is not inside the profile domain {}", j, self.domain_interval())));
        }
        for s in &self.segments {
            if !s.is_const() && s.q > s.lo && s.q < s.hi {
                return Err(Error::Internal(format!("pole at {} inside a segment", format_rational(&s.q))));
            }
        }
        Ok(self.integrate(&j.lo, &j.hi))
    }

    pub fn to_f64(&self) -> Profile<f64> {
        let c = |x: &Rational| x.to_f64();
        Profile {
            op: self.op,
            source: (c(&self.source.0), c(&self.source.1)),
            domain: (c(&self.domain.0), c(&self.domain.1)),
            segments: self
                .segments
                .iter()
                .map(|s| Segment { lo: c(&s.lo), hi: c(&s.hi), v: c(&s.v), q: c(&s.q), k: c(&s.k) })
                .collect(),
        }
    }
}

/// `op(w·1_I)` on `I`.
pub fn maximal_profile(w: &StepWeight, i: &Interval, op: Op) -> Result<MaximalProfile> {
    let r = w.restrict(i)?;
    let p: Pieces<Rational> = Pieces::from_weight(&r);
    Ok(Profile::from_pieces(&p, op, (i.lo.clone(), i.hi.clone())))
}

/// `op(w·1_I)` on a window `⊇ I`, where `w·1_I` vanishes outside `I`.
pub fn maximal_profile_window(w: &StepWeight, i: &Interval, op: Op, window: &Interval) -> Result<MaximalProfile> {
    if !window.contains_interval(i) {
        return Err(Error::Domain(format!("window {window} does not contain {i}")));
    }
    let r = w.restrict(i)?;
    let p: Pieces<Rational> = Pieces::from_weight_window(&r, &window.lo, &window.hi);
    Ok(Profile::from_pieces(&p, op, (i.lo.clone(), i.hi.clone())))
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Form::Const(c) => write!(f, "{}", format_rational(c)),
            Form::Moebius { alpha, v, q } => {
                write!(f, "({} - {}x)/({} - x)", format_rational(alpha), format_rational(v), format_rational(q))
            }
        }
    }
}

impl Serialize for MaximalProfile {
    fn serialize<Se: Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        use serde::ser::{SerializeMap, SerializeSeq};
        struct Segs<'a>(&'a [Segment<Rational>]);
        impl Serialize for Segs<'_> {
            fn serialize<Se: Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
                let mut seq = s.serialize_seq(Some(self.0.len()))?;
                for seg in self.0 {
                    seq.serialize_element(&serde_json::json!({
                        "interval": seg.interval(),
                        "form": seg.form().to_string(),
                    }))?;
                }
                seq.end()
            }
        }
        let mut map = s.serialize_map(Some(4))?;
        map.serialize_entry("op", self.op.tag())?;
        map.serialize_entry("source", &self.source_interval())?;
        map.serialize_entry("domain", &self.domain_interval())?;
        map.serialize_entry("segments", &Segs(&self.segments))?;
        map.end()
    }
}

/// `∫_J p` from the closed-form antiderivatives; never exact (logarithms).
pub fn integrate_profile(p: &MaximalProfile, j: &Interval) -> Result<crate::num::Real> {
    let v = p.integrate_over(j)?;
    if p.segments.iter().all(|s| s.is_const()) {
        let exact: Rational = p
            .segments
            .iter()
            .filter_map(|s| s.interval().intersect(j).map(|k| &s.v * k.length()))
            .sum();
        return Ok(crate::num::Real::from_rational(&exact));
    }
    Ok(crate::num::Real::approx(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maximal1d::eval_maximal_ambient;
    use crate::num::{int, rat};
    use rand::{Rng, SeedableRng};

    fn w(bps: &[Rational], vals: &[i64]) -> StepWeight {
        StepWeight::new(bps.to_vec(), vals.iter().map(|&v| int(v)).collect()).unwrap()
    }

    #[test]
    fn two_step_profiles() {
        let up = w(&[int(0), rat(1, 2), int(1)], &[1, 3]);
        let p = maximal_profile(&up, &up.support(), Op::M).unwrap();
        let forms: Vec<Form> = p.segments.iter().map(|s| s.form()).collect();
        assert_eq!(forms, vec![Form::Moebius { alpha: int(2), v: int(1), q: int(1) }, Form::Const(int(3))]);
        assert_eq!(p.segments[0].interval(), Interval::new(int(0), rat(1, 2)).unwrap());
        assert_eq!(forms[0].to_string(), "(2 - 1x)/(1 - x)");
        let v = integrate_profile(&p, &up.support()).unwrap();
        assert!(!v.exact);
        assert!((v.value - (2.0 + 2f64.ln())).abs() < 1e-12);

        let down = w(&[int(0), rat(1, 2), int(1)], &[3, 1]);
        let p = maximal_profile(&down, &down.support(), Op::MMinus).unwrap();
        assert_eq!(p.segments[0].form(), Form::Const(int(3)));
        assert_eq!(p.segments[0].interval(), Interval::new(int(0), rat(1, 2)).unwrap());
        let arc = &p.segments[1];
        assert!(!arc.is_const());
        assert_eq!(arc.eval(&rat(1, 2)), int(3));
        assert!(arc.eval(&int(1)) < int(3));
    }

    #[test]
    fn constant_profile_is_one_segment() {
        let c = w(&[int(0), rat(1, 3), int(2)], &[4, 4]);
        for op in [Op::M, Op::MPlus, Op::MMinus] {
            let p = maximal_profile(&c, &c.support(), op).unwrap();
            assert_eq!(p.segments.len(), 1);
            assert_eq!(p.segments[0].form(), Form::Const(int(4)));
            let v = integrate_profile(&p, &Interval::new(int(0), int(1)).unwrap()).unwrap();
            assert!(v.exact);
            assert_eq!(v.value, 4.0);
        }
    }

    #[test]
    fn integral_is_additive() {
        let x = w(&[int(0), rat(1, 4), rat(1, 2), rat(5, 8), int(1)], &[2, 7, 1, 4]);
        let p = maximal_profile(&x, &x.support(), Op::M).unwrap();
        let whole = p.integrate_over(&x.support()).unwrap();
        let a = p.integrate_over(&Interval::new(int(0), rat(3, 7)).unwrap()).unwrap();
        let b = p.integrate_over(&Interval::new(rat(3, 7), int(1)).unwrap()).unwrap();
        assert!((whole - a - b).abs() < 1e-12);
        assert!(p.integrate_over(&Interval::new(int(0), int(2)).unwrap()).is_err());
    }

    #[test]
    fn envelope_matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let m = rng.gen_range(1..=6);
            let mut bps = vec![int(0)];
            for _ in 0..m {
                let last = bps.last().unwrap().clone();
                bps.push(last + rat(rng.gen_range(1..=8), 8));
            }
            let vals: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=9)).collect();
            let wt = w(&bps, &vals);
            let i = wt.support();
            let window = Interval::new(&i.lo - int(1), &i.hi + int(1)).unwrap();
            for op in [Op::M, Op::MPlus, Op::MMinus] {
                let p = maximal_profile_window(&wt, &i, op, &window).unwrap();
                for s in &p.segments {
                    assert!(s.is_const() || s.q <= s.lo || s.q >= s.hi, "pole inside a segment");
                }
                for _ in 0..25 {
                    let x = &window.lo + window.length() * rat(rng.gen_range(0..=1000), 1000);
                    let expect = eval_maximal_ambient(&wt, &i, op, &x).unwrap();
                    assert_eq!(p.eval(&x), expect, "{op} at {x} for {vals:?}");
                }
                for b in wt.breakpoints() {
                    assert_eq!(p.eval(b), eval_maximal_ambient(&wt, &i, op, b).unwrap(), "{op} at breakpoint {b}");
                }
            }
        }
    }
}
