//! μ-dyadic grids for products of atomless measures on the line.
//!
//! Each axis interval splits at its half-mass point, so every box of
//! generation `k` carries mass `μ(R)/2^{nk}`. Averages against μ of a weight
//! that is constant on the leaf boxes are therefore plain means of leaf
//! values, and the maximal operator and Fujii–Wilson functional reduce to
//! their dyadic counterparts on the leaf array.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::dyadic::{dyadic_fujii_wilson, local_dyadic_maximal, verify_dyadic_rhi, DyadicCube, DyadicWeight};
use crate::error::{Error, Result};
use crate::geom::{Cube, Interval};
use crate::num::{format_rational, Rational, Tolerance};
use crate::report::{ConstantKind, ConstantReport, DeltaSource, TheoremId, Verdict};

/// Finite atomless measure on the line with a piecewise-linear distribution
/// function through the given knots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomlessMeasure1D {
    xs: Vec<Rational>,
    cdf: Vec<Rational>,
}

impl AtomlessMeasure1D {
    /// Knots `(x_k, F(x_k))` with `x` strictly increasing and `F`
    /// nondecreasing; `F` is shifted so it starts at 0.
    pub fn new(knots: Vec<(Rational, Rational)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Parse("a measure needs at least two knots".into()));
        }
        for pair in knots.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::Parse(format!("knot abscissae must increase: {} then {}", format_rational(&pair[0].0), format_rational(&pair[1].0))));
            }
            if pair[1].1 < pair[0].1 {
                return Err(Error::Parse(format!("distribution function decreases after {}", format_rational(&pair[0].0))));
            }
        }
        let base = knots[0].1.clone();
        let (xs, cdf): (Vec<_>, Vec<_>) = knots.into_iter().map(|(x, f)| (x, f - &base)).unzip();
        if cdf.last().expect("nonempty").is_zero() {
            return Err(Error::Parse("measure has zero total mass".into()));
        }
        Ok(AtomlessMeasure1D { xs, cdf })
    }

    pub fn lebesgue(i: &Interval) -> Self {
        AtomlessMeasure1D { xs: vec![i.lo.clone(), i.hi.clone()], cdf: vec![Rational::zero(), i.length()] }
    }

    /// Density `d_k` on `(x_k, x_{k+1})`, starting at `x₀ = lo`.
    pub fn from_densities(lo: Rational, pieces: &[(Rational, Rational)]) -> Result<Self> {
        let mut knots = vec![(lo, Rational::zero())];
        for (len, d) in pieces {
            if *len <= Rational::zero() || *d < Rational::zero() {
                return Err(Error::Parse("density pieces need positive length and nonnegative density".into()));
            }
            let (x, f) = knots.last().expect("nonempty").clone();
            knots.push((x + len, f + len * d));
        }
        AtomlessMeasure1D::new(knots)
    }

    pub fn knots(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.xs.iter().zip(&self.cdf)
    }

    pub fn support(&self) -> Interval {
        Interval::new(self.xs[0].clone(), self.xs.last().expect("nonempty").clone()).expect("increasing knots")
    }

    pub fn total(&self) -> &Rational {
        self.cdf.last().expect("nonempty")
    }

    pub fn cdf(&self, x: &Rational) -> Rational {
        if x <= &self.xs[0] {
            return Rational::zero();
        }
        match self.xs.iter().position(|k| k >= x) {
            None => self.total().clone(),
            Some(j) => {
                let (x0, x1) = (&self.xs[j - 1], &self.xs[j]);
                let (f0, f1) = (&self.cdf[j - 1], &self.cdf[j]);
                f0 + (f1 - f0) * (x - x0) / (x1 - x0)
            }
        }
    }

    pub fn mass(&self, i: &Interval) -> Rational {
        self.cdf(&i.hi) - self.cdf(&i.lo)
    }

    /// Least `x` with `F(x) = t`, for `0 ≤ t ≤ μ(R)`.
    pub fn quantile_left(&self, t: &Rational) -> Rational {
        if t <= &Rational::zero() {
            return self.xs[0].clone();
        }
        let j = self.cdf.iter().position(|f| f >= t).unwrap_or(self.cdf.len() - 1);
        let (x0, x1) = (&self.xs[j - 1], &self.xs[j]);
        let (f0, f1) = (&self.cdf[j - 1], &self.cdf[j]);
        x0 + (x1 - x0) * (t - f0) / (f1 - f0)
    }

    /// Maximal intervals of positive length and zero mass.
    pub fn flat_segments(&self) -> Vec<Interval> {
        let mut out: Vec<Interval> = Vec::new();
        for j in 1..self.xs.len() {
            if self.cdf[j] == self.cdf[j - 1] {
                match out.last_mut() {
                    Some(last) if last.hi == self.xs[j - 1] => last.hi = self.xs[j].clone(),
                    _ => out.push(Interval::new(self.xs[j - 1].clone(), self.xs[j].clone()).expect("increasing")),
                }
            }
        }
        out
    }
}

/// The μ-dyadic grid of a box down to generation `K`.
#[derive(Clone, Debug)]
pub struct MuDyadicGrid {
    measures: Vec<AtomlessMeasure1D>,
    root: Vec<Interval>,
    generations: u32,
    /// Per axis: the `2^K + 1` endpoints of the generation-`K` intervals.
    points: Vec<Vec<Rational>>,
}

pub fn build_mu_grid(measures: Vec<AtomlessMeasure1D>, root: Option<Vec<Interval>>, generations: u32) -> Result<MuDyadicGrid> {
    let n = measures.len();
    if n == 0 {
        return Err(Error::Domain("need at least one axis".into()));
    }
    if n as u64 * generations as u64 > 22 {
        return Err(Error::Domain(format!("2^{} leaf boxes is too many", n as u64 * generations as u64)));
    }
    let root = root.unwrap_or_else(|| measures.iter().map(|m| m.support()).collect());
    if root.len() != n {
        return Err(Error::Domain(format!("box has {} axes but there are {n} measures", root.len())));
    }
    let mut points = Vec::with_capacity(n);
    for (m, iv) in measures.iter().zip(&root) {
        if m.mass(iv).is_zero() {
            return Err(Error::Domain(format!("box axis {iv} has zero mass")));
        }
        let mut pts = vec![iv.lo.clone(), iv.hi.clone()];
        for _ in 0..generations {
            let mut next = Vec::with_capacity(2 * pts.len() - 1);
            for pair in pts.windows(2) {
                let (fa, fb) = (m.cdf(&pair[0]), m.cdf(&pair[1]));
                let half = (&fa + &fb) / Rational::from_integer(2.into());
                next.push(pair[0].clone());
                next.push(m.quantile_left(&half));
            }
            next.push(pts.last().expect("nonempty").clone());
            pts = next;
        }
        points.push(pts);
    }
    Ok(MuDyadicGrid { measures, root, generations, points })
}

/// One box of the grid with its μ-mass.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridBox {
    pub generation: u32,
    pub index: Vec<usize>,
    pub lo: Vec<String>,
    pub hi: Vec<String>,
    pub mass: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemovableSegment {
    pub axis: usize,
    pub lo: String,
    pub hi: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GridDump {
    pub dim: usize,
    pub generations: u32,
    pub total_mass: String,
    pub boxes: Vec<GridBox>,
    pub removable: Vec<RemovableSegment>,
}

impl MuDyadicGrid {
    /// Lebesgue grid on the cube of a dyadic weight, one leaf per cell.
    pub fn lebesgue_for(dw: &DyadicWeight) -> Result<MuDyadicGrid> {
        let axes: Vec<Interval> = (0..dw.dim()).map(|i| dw.cube().axis(i)).collect();
        build_mu_grid(axes.iter().map(AtomlessMeasure1D::lebesgue).collect(), Some(axes), dw.depth())
    }

    pub fn dim(&self) -> usize {
        self.measures.len()
    }

    pub fn generations(&self) -> u32 {
        self.generations
    }

    pub fn measures(&self) -> &[AtomlessMeasure1D] {
        &self.measures
    }

    pub fn leaf_count(&self) -> usize {
        1 << (self.dim() as u32 * self.generations)
    }

    pub fn total_mass(&self) -> Rational {
        self.measures.iter().zip(&self.root).map(|(m, iv)| m.mass(iv)).product()
    }

    /// Axis interval `k` of generation `g`.
    pub fn axis_interval(&self, axis: usize, g: u32, k: usize) -> Result<Interval> {
        if g > self.generations || k >= 1 << g {
            return Err(Error::Domain(format!("no interval {k} in generation {g}")));
        }
        let stride = 1usize << (self.generations - g);
        let pts = &self.points[axis];
        Interval::new(pts[k * stride].clone(), pts[(k + 1) * stride].clone())
    }

    pub fn box_mass(&self, g: u32, index: &[usize]) -> Result<Rational> {
        let mut m = Rational::one();
        for (axis, &k) in index.iter().enumerate() {
            m *= self.measures[axis].mass(&self.axis_interval(axis, g, k)?);
        }
        Ok(m)
    }

    /// Whether every interval splits into two children of equal mass.
    pub fn check_equal_mass_split(&self) -> bool {
        (0..self.dim()).all(|axis| {
            (0..self.generations).all(|g| {
                (0..1usize << g).all(|k| {
                    let c0 = self.axis_interval(axis, g + 1, 2 * k).expect("in range");
                    let c1 = self.axis_interval(axis, g + 1, 2 * k + 1).expect("in range");
                    self.measures[axis].mass(&c0) == self.measures[axis].mass(&c1)
                })
            })
        })
    }

    /// Flat segments of the axis measures inside the root box. They are
    /// μ-null, so they can be dropped from any integral against μ.
    pub fn removable_segments(&self) -> Vec<(usize, Interval)> {
        let mut out = Vec::new();
        for (axis, (m, iv)) in self.measures.iter().zip(&self.root).enumerate() {
            for s in m.flat_segments() {
                if let Some(x) = s.intersect(iv) {
                    out.push((axis, x));
                }
            }
        }
        out
    }

    /// Leaf intervals along `axis` with the μ-null parts at both ends removed;
    /// `None` for a leaf of zero mass.
    pub fn essential_leaf(&self, axis: usize, k: usize) -> Result<Option<Interval>> {
        let iv = self.axis_interval(axis, self.generations, k)?;
        let m = &self.measures[axis];
        let (fa, fb) = (m.cdf(&iv.lo), m.cdf(&iv.hi));
        if fa == fb {
            return Ok(None);
        }
        let lo = {
            let mut x = iv.lo.clone();
            for s in m.flat_segments() {
                if s.lo <= x && s.hi > x {
                    x = s.hi.clone();
                }
            }
            x
        };
        let hi = m.quantile_left(&fb);
        Ok(Some(Interval::new(lo, hi)?))
    }

    /// All boxes of generations `0..=K`; empty when that is more than
    /// `limit` boxes.
    pub fn dump(&self, limit: usize) -> Result<GridDump> {
        let n = self.dim();
        let count: usize = (0..=self.generations).map(|g| 1usize << (n as u32 * g)).sum();
        if count > limit {
            return Err(Error::Domain(format!("grid has {count} boxes, more than the limit {limit}")));
        }
        let mut boxes = Vec::with_capacity(count);
        for g in 0..=self.generations {
            let side = 1usize << g;
            for flat in 0..side.pow(n as u32) {
                let mut index = vec![0; n];
                let mut r = flat;
                for slot in index.iter_mut().rev() {
                    *slot = r % side;
                    r /= side;
                }
                let ivs: Vec<Interval> = index.iter().enumerate().map(|(a, &k)| self.axis_interval(a, g, k)).collect::<Result<_>>()?;
                boxes.push(GridBox {
                    generation: g,
                    lo: ivs.iter().map(|iv| format_rational(&iv.lo)).collect(),
                    hi: ivs.iter().map(|iv| format_rational(&iv.hi)).collect(),
                    mass: format_rational(&self.box_mass(g, &index)?),
                    index,
                });
            }
        }
        let removable = self
            .removable_segments()
            .into_iter()
            .map(|(axis, iv)| RemovableSegment { axis, lo: format_rational(&iv.lo), hi: format_rational(&iv.hi) })
            .collect();
        Ok(GridDump { dim: n, generations: self.generations, total_mass: format_rational(&self.total_mass()), boxes, removable })
    }
}

/// A weight constant on each leaf box, row-major in the leaf multi-index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuCellWeight {
    values: Vec<Rational>,
    /// The same values on a unit cube, for the dyadic kernel.
    leaves: DyadicWeight,
}

impl MuCellWeight {
    pub fn new(grid: &MuDyadicGrid, values: Vec<Rational>) -> Result<Self> {
        let leaves = DyadicWeight::new(Cube::unit(grid.dim()), grid.generations, values.clone())?;
        Ok(MuCellWeight { values, leaves })
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// `(1/μ(S)) ∫_S w dμ` for a grid box `S`.
    pub fn mu_average(&self, s: &DyadicCube) -> Result<Rational> {
        let sub = self.leaves.subcube(s)?;
        Ok(sub.cells().iter().sum::<Rational>() / Rational::from_integer(BigInt::from(sub.cells().len())))
    }
}

/// `M^μ_S(w·1_S)` on the leaves below the grid box `S`, row-major: the
/// largest μ-average over the grid boxes between the leaf and `S`.
pub fn mu_dyadic_maximal(w: &MuCellWeight, s: &DyadicCube) -> Result<Vec<Rational>> {
    Ok(local_dyadic_maximal(&w.leaves.subcube(s)?).cells().to_vec())
}

/// `max_S (1/∫_S w dμ) ∫_S M^μ_S(w·1_S) dμ` over the grid boxes. Rectangles
/// that are not grid boxes are not searched, so this is a lower bound for
/// the constant over all rectangles.
pub fn mu_strong_fujii_wilson(w: &MuCellWeight) -> ConstantReport {
    let d = dyadic_fujii_wilson(&w.leaves);
    ConstantReport::exact(ConstantKind::MuStrongFujiiWilson, d.exact_value.expect("exact"), true, w.leaves.depth(), d.witness)
}

/// The μ-grid reverse Hölder inequalities `COR4_3` (any dimension) and
/// `COR3_5` (on the line) with δ the grid Fujii–Wilson constant.
pub fn verify_mu_rhi(grid: &MuDyadicGrid, w: &MuCellWeight, r: f64, id: TheoremId, tol: Tolerance) -> Result<Verdict> {
    match id {
        TheoremId::Cor4_3 => {}
        TheoremId::Cor3_5 if grid.dim() == 1 => {}
        TheoremId::Cor3_5 => return Err(Error::Domain(format!("{id} is one-dimensional, the grid has {} axes", grid.dim()))),
        other => return Err(Error::Domain(format!("{other} is not a μ-grid inequality"))),
    }
    if w.leaves.depth() != grid.generations || w.leaves.dim() != grid.dim() {
        return Err(Error::Domain("weight does not match the grid".into()));
    }
    let mut v = verify_dyadic_rhi(&w.leaves, r, id, tol)?;
    v.delta_source = DeltaSource::Exact(ConstantKind::MuStrongFujiiWilson);
    Ok(v)
}
