//! Weight-class constants of step weights: exact `A₁`/`A₁⁺`, and grid-refined
//! lower bounds for `A_p`, Fujii–Wilson, Khrushchev and Gurov–Reshetnyak.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::Interval;
use crate::maximal1d::hull::Pieces;
use crate::maximal1d::profile::build_segments;
use crate::maximal1d::{maximal_profile, Op};
use crate::num::{from_f64, to_f64, Rational, Scalar};
use crate::report::{ConstantKind, ConstantReport, Witness};
use crate::weight::StepWeight;

pub const DEFAULT_DEPTH: u32 = 6;

/// Base points plus `2^depth` equal subdivisions of every gap between
/// consecutive base points.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinementGrid {
    base: Vec<Rational>,
    depth: u32,
}

impl RefinementGrid {
    pub fn new(mut base: Vec<Rational>, depth: u32) -> Self {
        base.sort();
        base.dedup();
        RefinementGrid { base, depth }
    }

    /// Breakpoints of `w` (which include the support endpoints).
    pub fn for_weight(w: &StepWeight, depth: u32) -> Self {
        RefinementGrid::new(w.breakpoints().to_vec(), depth)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn base(&self) -> &[Rational] {
        &self.base
    }

    pub fn points(&self) -> Vec<Rational> {
        let k = 1i64 << self.depth;
        let mut out = Vec::with_capacity(self.base.len().saturating_sub(1) * k as usize + 1);
        for pair in self.base.windows(2) {
            let step = (&pair[1] - &pair[0]) / Rational::from_integer(k.into());
            for j in 0..k {
                out.push(&pair[0] + &step * Rational::from_integer(j.into()));
            }
        }
        out.extend(self.base.last().cloned());
        out
    }
}

/// `(max_j ratio_j, piece index)` of the `A₁` (or `A₁⁺` when `plus`) sweep:
/// on piece `j` the maximal function peaks at an endpoint, where it equals
/// the best one-sided slope of the primitive.
pub fn a1_sweep<S: Scalar>(p: &Pieces<S>, plus: bool) -> (S, usize) {
    let left = p.left_slopes();
    let right = if plus { Vec::new() } else { p.right_slopes() };
    let mut best: Option<(S, usize)> = None;
    for j in 0..p.len() {
        let v = &p.vals[j];
        let mut peak = v.clone();
        let mut cands: Vec<&Option<S>> = vec![&left[j], &left[j + 1]];
        if !plus {
            cands.push(&right[j]);
            cands.push(&right[j + 1]);
        }
        for c in cands.into_iter().flatten() {
            if *c > peak {
                peak = c.clone();
            }
        }
        let ratio = peak / v.clone();
        if best.as_ref().is_none_or(|(b, _)| ratio > *b) {
            best = Some((ratio, j));
        }
    }
    best.expect("at least one piece")
}

fn a1_report(w: &StepWeight, plus: bool) -> ConstantReport {
    let w = w.merged();
    let p: Pieces<Rational> = Pieces::from_weight(&w);
    let (value, j) = a1_sweep(&p, plus);
    let bps = w.breakpoints();
    let witness = Witness::Interval(Interval { lo: bps[j].clone(), hi: bps[j + 1].clone() });
    let kind = if plus { ConstantKind::A1Plus } else { ConstantKind::A1 };
    ConstantReport::exact(kind, value, false, 0, Some(witness))
}

/// `ess sup M(w·1_I)/w` over the support `I`, exactly.
pub fn a1_constant(w: &StepWeight) -> ConstantReport {
    a1_report(w, false)
}

/// `ess sup M⁻(w·1_I)/w` over the support `I`, exactly.
pub fn a1_plus_constant(w: &StepWeight) -> ConstantReport {
    a1_report(w, true)
}

/// Every grid interval `(p_i, p_j)` as the f64 step function it carries.
struct GridSweep {
    pts: Vec<f64>,
    /// Index of the weight piece containing `(pts[i], pts[i+1])`.
    piece: Vec<usize>,
    bps: Vec<f64>,
    vals: Vec<f64>,
}

impl GridSweep {
    fn new(w: &StepWeight, grid: &RefinementGrid) -> Self {
        let pts_r = grid.points();
        let piece = pts_r.windows(2).map(|g| w.piece_index(&((&g[0] + &g[1]) / Rational::from_integer(2.into()))).unwrap_or(0)).collect();
        let (bps, vals) = w.to_f64_parts();
        GridSweep { pts: pts_r.iter().map(to_f64).collect(), piece, bps, vals }
    }

    /// Pieces of `w` on `(pts[i], pts[j])`, written into the buffers.
    fn clip(&self, i: usize, j: usize, xs: &mut Vec<f64>, vs: &mut Vec<f64>) {
        xs.clear();
        vs.clear();
        xs.push(self.pts[i]);
        let (first, last) = (self.piece[i], self.piece[j - 1]);
        for k in first..=last {
            vs.push(self.vals[k]);
            xs.push(if k == last { self.pts[j] } else { self.bps[k + 1] });
        }
    }

    /// `max` over grid intervals of `f(xs, vs)`; ties keep the
    /// lexicographically smallest `(i, j)`.
    fn max_over<F>(&self, f: F) -> (f64, usize, usize)
    where
        F: Fn(&[f64], &[f64]) -> f64 + Sync,
    {
        let n = self.pts.len();
        (0..n.saturating_sub(1))
            .into_par_iter()
            .map(|i| {
                let (mut xs, mut vs) = (Vec::new(), Vec::new());
                let mut best = (f64::NEG_INFINITY, i, i + 1);
                for j in i + 1..n {
                    self.clip(i, j, &mut xs, &mut vs);
                    let v = f(&xs, &vs);
                    if v > best.0 {
                        best = (v, i, j);
                    }
                }
                best
            })
            .reduce(|| (f64::NEG_INFINITY, usize::MAX, usize::MAX), |a, b| if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) { b } else { a })
    }
}

impl GridSweep {
    /// Pieces of `w` on an arbitrary `(a, b)` inside the support.
    fn clip_f64(&self, a: f64, b: f64, xs: &mut Vec<f64>, vs: &mut Vec<f64>) {
        xs.clear();
        vs.clear();
        xs.push(a);
        let first = self.bps.partition_point(|x| *x <= a).saturating_sub(1).min(self.vals.len() - 1);
        let last = self.bps.partition_point(|x| *x < b).saturating_sub(1).min(self.vals.len() - 1);
        for k in first..=last {
            vs.push(self.vals[k]);
            xs.push(if k == last { b } else { self.bps[k + 1] });
        }
    }

    /// Pattern search on the endpoints of the best grid interval. Any interval
    /// is admissible, so the result is still a lower bound for the supremum.
    fn polish<F>(&self, i: usize, j: usize, v: f64, f: F) -> (f64, f64, f64)
    where
        F: Fn(&[f64], &[f64]) -> f64,
    {
        let (lo, hi) = (self.bps[0], self.bps[self.bps.len() - 1]);
        let (mut a, mut b, mut best) = (self.pts[i], self.pts[j], v);
        let (mut xs, mut vs) = (Vec::new(), Vec::new());
        let mut step = (b - a) / 8.0;
        while step > 1e-13 * (hi - lo) {
            let mut moved = false;
            for (da, db) in [(-step, 0.0), (step, 0.0), (0.0, -step), (0.0, step)] {
                let (na, nb) = ((a + da).max(lo), (b + db).min(hi));
                if nb - na <= step {
                    continue;
                }
                self.clip_f64(na, nb, &mut xs, &mut vs);
                let y = f(&xs, &vs);
                if y > best {
                    (a, b, best, moved) = (na, nb, y, true);
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        (best, a, b)
    }
}

/// `(1/w(J)) ∫_J op(w·1_J)` for a step function given by parts.
pub fn fw_functional_parts(xs: &[f64], vs: &[f64], op: Op) -> f64 {
    if vs.iter().all(|v| *v == vs[0]) {
        return 1.0;
    }
    let p = Pieces::new(xs.to_vec(), vs.to_vec());
    let total: f64 = build_segments(&p, op).iter().map(|s| s.integral(&s.lo, &s.hi)).sum();
    total / p.cum[p.len()]
}

/// The functional `(1/w(J)) ∫_J op(w·1_J)` on one interval, via the exact profile.
pub fn fujii_wilson_functional(w: &StepWeight, j: &Interval, op: Op) -> Result<f64> {
    let r = w.restrict(j)?;
    if r.is_constant() {
        return Ok(1.0);
    }
    let p = maximal_profile(&r, j, op)?;
    Ok(p.integrate_over(j)? / to_f64(&r.total_mass()))
}

fn grid_witness(g: &[Rational], i: usize, j: usize) -> Option<Witness> {
    Some(Witness::Interval(Interval { lo: g[i].clone(), hi: g[j].clone() }))
}

fn fw_report(w: &StepWeight, grid: &RefinementGrid, op: Op, kind: ConstantKind) -> ConstantReport {
    let w = w.merged();
    if w.is_constant() {
        return ConstantReport::exact(kind, Rational::from_integer(1.into()), true, grid.depth(), Some(Witness::Interval(w.support())));
    }
    let sweep = GridSweep::new(&w, grid);
    let (v, i, j) = sweep.max_over(|xs, vs| fw_functional_parts(xs, vs, op));
    let (pv, a, b) = sweep.polish(i, j, v, |xs, vs| fw_functional_parts(xs, vs, op));
    if pv > v {
        if let (Ok(lo), Ok(hi)) = (from_f64(a), from_f64(b)) {
            return ConstantReport::approx(kind, pv.max(1.0), grid.depth(), Some(Witness::Interval(Interval { lo, hi })));
        }
    }
    ConstantReport::approx(kind, v.max(1.0), grid.depth(), grid_witness(&grid.points(), i, j))
}

/// Grid lower bound for `(w)_{A_∞} = sup_J (1/w(J)) ∫_J M(w·1_J)`.
pub fn fujii_wilson_constant(w: &StepWeight, grid: &RefinementGrid) -> ConstantReport {
    fw_report(w, grid, Op::M, ConstantKind::FujiiWilson)
}

/// Grid lower bound for `(w)_{A_∞⁺} = sup_J (1/w(J)) ∫_J M⁻(w·1_J)`.
pub fn fujii_wilson_plus_constant(w: &StepWeight, grid: &RefinementGrid) -> ConstantReport {
    fw_report(w, grid, Op::MMinus, ConstantKind::FujiiWilsonPlus)
}

/// Grid lower bound for `[w]_{A_p}`; exact rational arithmetic when `p = 2`.
pub fn ap_constant(w: &StepWeight, p: f64, grid: &RefinementGrid) -> Result<ConstantReport> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("A_p needs 1 < p < ∞, got {p}")));
    }
    let w = w.merged();
    let pts = grid.points();
    if w.is_constant() {
        return Ok(ConstantReport::exact(ConstantKind::Ap, Rational::from_integer(1.into()), true, grid.depth(), Some(Witness::Interval(w.support()))));
    }
    if p == 2.0 {
        let inv = StepWeight::new(w.breakpoints().to_vec(), w.values().iter().map(|v| v.recip()).collect())?;
        let cw: Vec<Rational> = pts.iter().map(|x| w.cumulative(x)).collect();
        let ci: Vec<Rational> = pts.iter().map(|x| inv.cumulative(x)).collect();
        let mut best: Option<(Rational, usize, usize)> = None;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let len = &pts[j] - &pts[i];
                let v = (&cw[j] - &cw[i]) * (&ci[j] - &ci[i]) / (&len * &len);
                if best.as_ref().is_none_or(|b| v > b.0) {
                    best = Some((v, i, j));
                }
            }
        }
        let (v, i, j) = best.expect("grid has two points");
        return Ok(ConstantReport::exact(ConstantKind::Ap, v, true, grid.depth(), grid_witness(&pts, i, j)));
    }
    let e = -1.0 / (p - 1.0);
    let sweep = GridSweep::new(&w, grid);
    let (v, i, j) = sweep.max_over(|xs, vs| {
        let (mut m, mut d) = (0.0, 0.0);
        for k in 0..vs.len() {
            let len = xs[k + 1] - xs[k];
            m += vs[k] * len;
            d += vs[k].powf(e) * len;
        }
        let len = xs[xs.len() - 1] - xs[0];
        (m / len) * (d / len).powf(p - 1.0)
    });
    Ok(ConstantReport::approx(ConstantKind::Ap, v.max(1.0), grid.depth(), grid_witness(&pts, i, j)))
}

/// Grid lower bound for `sup_J ⟨w⟩_J exp(⟨log w^{-1}⟩_J)`.
pub fn khrushchev_constant(w: &StepWeight, grid: &RefinementGrid) -> ConstantReport {
    let w = w.merged();
    if w.is_constant() {
        return ConstantReport::exact(ConstantKind::Khrushchev, Rational::from_integer(1.into()), true, grid.depth(), Some(Witness::Interval(w.support())));
    }
    let sweep = GridSweep::new(&w, grid);
    let (v, i, j) = sweep.max_over(|xs, vs| {
        let (mut m, mut l) = (0.0, 0.0);
        for k in 0..vs.len() {
            let len = xs[k + 1] - xs[k];
            m += vs[k] * len;
            l += vs[k].ln() * len;
        }
        let len = xs[xs.len() - 1] - xs[0];
        (m / len) * (-l / len).exp()
    });
    ConstantReport::approx(ConstantKind::Khrushchev, v.max(1.0), grid.depth(), grid_witness(&grid.points(), i, j))
}

/// `(1/w(J)) ∫_J |w − ⟨w⟩_J|`, exactly.
pub fn gurov_reshetnyak_functional(w: &StepWeight, j: &Interval) -> Result<Rational> {
    let r = w.restrict(j)?;
    let mass = r.total_mass();
    let avg = &mass / j.length();
    let dev: Rational = r.pieces().map(|(a, b, v)| num_traits::Signed::abs(&(v - &avg)) * (b - a)).sum();
    Ok(dev / mass)
}

/// Grid lower bound for the Gurov–Reshetnyak functional, exact per interval.
pub fn gurov_reshetnyak(w: &StepWeight, grid: &RefinementGrid) -> ConstantReport {
    let w = w.merged();
    let pts = grid.points();
    let sweep = GridSweep::new(&w, grid);
    // rank in floating point, then recompute the leaders exactly
    let (v, i, j) = sweep.max_over(|xs, vs| {
        let (mut m, len) = (0.0, xs[xs.len() - 1] - xs[0]);
        for k in 0..vs.len() {
            m += vs[k] * (xs[k + 1] - xs[k]);
        }
        let avg = m / len;
        (0..vs.len()).map(|k| (vs[k] - avg).abs() * (xs[k + 1] - xs[k])).sum::<f64>() / m
    });
    let mut best: Option<(Rational, usize, usize)> = None;
    let cutoff = v * (1.0 - 1e-9) - 1e-12;
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            if !(a == i && b == j) {
                let mut xs = Vec::new();
                let mut vs = Vec::new();
                sweep.clip(a, b, &mut xs, &mut vs);
                let (mut m, len) = (0.0, xs[xs.len() - 1] - xs[0]);
                for k in 0..vs.len() {
                    m += vs[k] * (xs[k + 1] - xs[k]);
                }
                let avg = m / len;
                let g = (0..vs.len()).map(|k| (vs[k] - avg).abs() * (xs[k + 1] - xs[k])).sum::<f64>() / m;
                if g < cutoff {
                    continue;
                }
            }
            let exact = gurov_reshetnyak_functional(&w, &Interval { lo: pts[a].clone(), hi: pts[b].clone() }).expect("grid interval inside support");
            if best.as_ref().is_none_or(|x| exact > x.0) {
                best = Some((exact, a, b));
            }
        }
    }
    let (val, a, b) = best.expect("grid has two points");
    ConstantReport::exact(ConstantKind::GurovReshetnyak, val, true, grid.depth(), grid_witness(&pts, a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};

    fn two_step() -> StepWeight {
        StepWeight::new(vec![int(0), rat(1, 2), int(1)], vec![int(1), int(3)]).unwrap()
    }

    fn three_one() -> StepWeight {
        StepWeight::new(vec![int(0), rat(1, 2), int(1)], vec![int(3), int(1)]).unwrap()
    }

    fn constant() -> StepWeight {
        StepWeight::new(vec![int(0), rat(1, 3), int(2)], vec![rat(5, 2), rat(5, 2)]).unwrap()
    }

    #[test]
    fn grid_points_nest() {
        let g0 = RefinementGrid::for_weight(&two_step(), 0).points();
        assert_eq!(g0, vec![int(0), rat(1, 2), int(1)]);
        let g2 = RefinementGrid::for_weight(&two_step(), 2).points();
        assert_eq!(g2.len(), 9);
        assert!(g0.iter().all(|x| g2.contains(x)));
        let g3 = RefinementGrid::for_weight(&two_step(), 3).points();
        assert!(g2.iter().all(|x| g3.contains(x)));
    }

    #[test]
    fn a1_examples() {
        let r = a1_constant(&two_step());
        assert_eq!(r.exact_value, Some(int(3)));
        assert!(!r.is_lower_bound);
        assert_eq!(a1_constant(&constant()).exact_value, Some(int(1)));
        assert_eq!(a1_plus_constant(&constant()).exact_value, Some(int(1)));
        // M⁻ carries the mass of the left piece onto the right one
        let r = a1_plus_constant(&three_one());
        assert_eq!(r.exact_value, Some(int(3)));
        assert_eq!(r.witness, Some(Witness::Interval(Interval::new(rat(1, 2), int(1)).unwrap())));
        // the increasing weight has nothing to carry backwards
        assert_eq!(a1_plus_constant(&two_step()).exact_value, Some(int(1)));
    }

    #[test]
    fn a1_matches_pointwise_brute_force() {
        use crate::maximal1d::eval_maximal;
        let w = StepWeight::new(vec![int(0), rat(1, 4), rat(1, 2), rat(5, 8), int(1)], vec![int(2), int(7), int(1), int(4)]).unwrap();
        let i = w.support();
        for (op, rep) in [(Op::M, a1_constant(&w)), (Op::MMinus, a1_plus_constant(&w))] {
            let mut best = int(0);
            for (a, b, v) in w.pieces() {
                for x in [a.clone(), b.clone()] {
                    let m = eval_maximal(&w, &i, op, &x).unwrap();
                    let lim = if op == Op::MMinus && &x == a {
                        // M⁻ is left-continuous; the right limit at `a` is
                        // the larger of M⁻(a) and the piece value
                        if m > *v { m } else { v.clone() }
                    } else {
                        m
                    };
                    let q = lim / v;
                    if q > best {
                        best = q;
                    }
                }
            }
            assert_eq!(rep.exact_value, Some(best), "{op}");
        }
    }

    #[test]
    fn ap_examples() {
        let g0 = RefinementGrid::for_weight(&two_step(), 0);
        let r = ap_constant(&two_step(), 2.0, &g0).unwrap();
        assert_eq!(r.exact_value, Some(rat(4, 3)));
        assert!(r.is_lower_bound);
        for d in 0..4 {
            let g = RefinementGrid::for_weight(&constant(), d);
            assert_eq!(ap_constant(&constant(), 3.0, &g).unwrap().exact_value, Some(int(1)));
        }
        let mut last = 0.0;
        for d in 0..5 {
            let v = ap_constant(&two_step(), 1.5, &RefinementGrid::for_weight(&two_step(), d)).unwrap().value.value;
            assert!(v >= last);
            last = v;
        }
        assert!(ap_constant(&two_step(), 1.0, &g0).is_err());
    }

    #[test]
    fn fw_examples() {
        let w = two_step();
        let f = fujii_wilson_functional(&w, &w.support(), Op::M).unwrap();
        assert!((f - (2.0 + 2f64.ln()) / 2.0).abs() < 1e-12);
        let r0 = fujii_wilson_constant(&w, &RefinementGrid::for_weight(&w, 0));
        let r4 = fujii_wilson_constant(&w, &RefinementGrid::for_weight(&w, 4));
        assert!(r0.value.value >= f - 1e-12);
        assert!(r4.value.value >= r0.value.value);
        assert!(r4.is_lower_bound);
        let c = fujii_wilson_constant(&constant(), &RefinementGrid::for_weight(&constant(), 3));
        assert_eq!(c.exact_value, Some(int(1)));
        assert_eq!(fujii_wilson_plus_constant(&constant(), &RefinementGrid::for_weight(&constant(), 3)).exact_value, Some(int(1)));
    }

    #[test]
    fn fw_parts_agree_with_exact_profile() {
        let w = StepWeight::new(vec![int(0), rat(1, 4), rat(1, 2), rat(5, 8), int(1)], vec![int(2), int(7), int(1), int(4)]).unwrap();
        let (xs, vs) = w.to_f64_parts();
        for op in [Op::M, Op::MMinus, Op::MPlus] {
            let a = fw_functional_parts(&xs, &vs, op);
            let b = fujii_wilson_functional(&w, &w.support(), op).unwrap();
            assert!((a - b).abs() < 1e-12, "{op}: {a} vs {b}");
        }
    }

    #[test]
    fn khrushchev_and_gr_examples() {
        let w = two_step();
        let g0 = RefinementGrid::for_weight(&w, 0);
        let k = khrushchev_constant(&w, &g0);
        assert!(k.value.value >= 2.0 / 3f64.sqrt() - 1e-12);
        assert_eq!(gurov_reshetnyak_functional(&w, &w.support()).unwrap(), rat(1, 2));
        let gr = gurov_reshetnyak(&w, &g0);
        assert!(gr.exact_value.clone().unwrap() >= rat(1, 2));
        assert_eq!(gurov_reshetnyak(&constant(), &RefinementGrid::for_weight(&constant(), 2)).exact_value, Some(int(0)));
        assert_eq!(khrushchev_constant(&constant(), &g0).exact_value, Some(int(1)));
    }
}
