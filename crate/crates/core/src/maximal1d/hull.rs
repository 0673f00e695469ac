//! Piece tables and convex-hull candidate generation.
//!
//! Points `P_i = (x_i, F(x_i))` on the graph of the primitive `F` of a step
//! function. Left averages `(F(x) − F(a))/(x − a)` are maximized over the
//! lower hull of the points to the left of `x`, right averages over the upper
//! hull of the points to the right.

use crate::num::{Rational, Scalar};
use crate::weight::StepWeight;

/// Breakpoints, values and primitive of a step function (zero pieces allowed).
#[derive(Clone, Debug)]
pub struct Pieces<S> {
    pub pts: Vec<S>,
    pub vals: Vec<S>,
    pub cum: Vec<S>,
}

impl<S: Scalar> Pieces<S> {
    pub fn new(pts: Vec<S>, vals: Vec<S>) -> Self {
        debug_assert_eq!(pts.len(), vals.len() + 1);
        let mut cum = Vec::with_capacity(pts.len());
        cum.push(S::zero());
        for k in 0..vals.len() {
            let c = cum[k].clone() + vals[k].clone() * (pts[k + 1].clone() - pts[k].clone());
            cum.push(c);
        }
        Pieces { pts, vals, cum }
    }

    pub fn from_weight(w: &StepWeight) -> Self {
        Pieces::new(
            w.breakpoints().iter().map(S::from_rational).collect(),
            w.values().iter().map(S::from_rational).collect(),
        )
    }

    /// `w` extended by zero to `[lo, hi] ⊇ support`.
    pub fn from_weight_window(w: &StepWeight, lo: &Rational, hi: &Rational) -> Self {
        let sup = w.support();
        let mut pts = Vec::with_capacity(w.breakpoints().len() + 2);
        let mut vals = Vec::with_capacity(w.values().len() + 2);
        if lo < &sup.lo {
            pts.push(S::from_rational(lo));
            vals.push(S::zero());
        }
        pts.extend(w.breakpoints().iter().map(S::from_rational));
        vals.extend(w.values().iter().map(S::from_rational));
        if hi > &sup.hi {
            pts.push(S::from_rational(hi));
            vals.push(S::zero());
        }
        Pieces::new(pts, vals)
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn slope(&self, i: usize, j: usize) -> S {
        (self.cum[j].clone() - self.cum[i].clone()) / (self.pts[j].clone() - self.pts[i].clone())
    }

    fn cross(&self, o: usize, a: usize, b: usize) -> S {
        let (xo, yo) = (&self.pts[o], &self.cum[o]);
        (self.pts[a].clone() - xo.clone()) * (self.cum[b].clone() - yo.clone())
            - (self.cum[a].clone() - yo.clone()) * (self.pts[b].clone() - xo.clone())
    }

    fn push_lower(&self, hull: &mut Vec<usize>, i: usize) {
        while hull.len() >= 2 && self.cross(hull[hull.len() - 2], hull[hull.len() - 1], i).sign() <= 0 {
            hull.pop();
        }
        hull.push(i);
    }

    /// `L[i] = max_{a<i} (F(x_i) − F(x_a))/(x_i − x_a)`, `None` for `i = 0`.
    /// This is the left limit of the backward maximal function at `x_i`.
    pub fn left_slopes(&self) -> Vec<Option<S>> {
        let mut out = Vec::with_capacity(self.pts.len());
        let mut hull: Vec<usize> = Vec::new();
        for i in 0..self.pts.len() {
            self.push_lower(&mut hull, i);
            out.push((hull.len() >= 2).then(|| self.slope(hull[hull.len() - 2], i)));
        }
        out
    }

    /// `R[i] = max_{b>i} (F(x_b) − F(x_i))/(x_b − x_i)`, `None` for the last point.
    pub fn right_slopes(&self) -> Vec<Option<S>> {
        let n = self.pts.len();
        let mut out = vec![None; n];
        let mut hull: Vec<usize> = Vec::new();
        for i in (0..n).rev() {
            self.push_lower(&mut hull, i);
            if hull.len() >= 2 {
                out[i] = Some(self.slope(i, hull[hull.len() - 2]));
            }
        }
        out
    }

    /// Lower hull vertices of `P_0..=P_j` for every `j`, as flattened snapshots
    /// `(offsets, indices)`.
    pub(crate) fn lower_hull_snapshots(&self) -> (Vec<usize>, Vec<usize>) {
        let mut offsets = Vec::with_capacity(self.pts.len() + 1);
        let mut flat = Vec::new();
        let mut hull = Vec::new();
        offsets.push(0);
        for i in 0..self.pts.len() {
            self.push_lower(&mut hull, i);
            flat.extend_from_slice(&hull);
            offsets.push(flat.len());
        }
        (offsets, flat)
    }

    /// Upper hull vertices of `P_j..` for every `j`, flattened; snapshot `j`
    /// lives at `offsets[j]..offsets[j+1]`.
    pub(crate) fn upper_hull_snapshots(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.pts.len();
        let mut per: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut hull = Vec::new();
        for i in (0..n).rev() {
            self.push_lower(&mut hull, i);
            per[i] = hull.clone();
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut flat = Vec::new();
        offsets.push(0);
        for h in per {
            flat.extend(h);
            offsets.push(flat.len());
        }
        (offsets, flat)
    }
}
