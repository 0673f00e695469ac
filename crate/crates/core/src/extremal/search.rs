//! Seeded derivative-free search for weights that nearly saturate an
//! inequality under a constraint `[w] ≤ δ` on its constant.
//!
//! Weights live on `(0, 1)` with breakpoints on a geometric grid, so the
//! search can resolve the many scales a power-type singularity at 0 needs.
//! Each restart starts either from a power weight `x^{τ−1}` (with `τ`
//! bisected until its discretization meets the constraint) or from random
//! values, then runs a coordinate pattern search on log-values. Infeasible
//! candidates are shrunk toward the constant weight by bisection. All
//! evaluation is in f64; the returned witness is an exact [`StepWeight`].

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::num::{from_f64, Rational, Tolerance};
use crate::report::TheoremId;
use crate::rhi::sharp_constant;
use crate::weight::StepWeight;

/// Inequalities the search can target; both have exact `A₁`-type constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `∫_I w^r ≤ C·M⁻(w1_I)(b)^{r−1}·∫_I w` under `[w]_{A₁⁺} ≤ δ`.
    OnesidedA1First,
    /// `⟨w^r⟩_I ≤ C·⟨w⟩_I^r` under `[w]_{A₁} ≤ δ`.
    TwoSidedA1,
}

impl Variant {
    pub fn theorem(self) -> TheoremId {
        match self {
            Variant::OnesidedA1First => TheoremId::T3_1First,
            Variant::TwoSidedA1 => TheoremId::BswA1,
        }
    }

    pub fn from_theorem(id: TheoremId) -> Result<Self> {
        match id {
            TheoremId::T3_1First => Ok(Variant::OnesidedA1First),
            TheoremId::BswA1 => Ok(Variant::TwoSidedA1),
            other => Err(Error::Domain(format!("no sharpness search for {other}; use t3.1-first or bsw-a1"))),
        }
    }

    /// The constrained constant of the step weight `(a, v)`.
    fn constant(self, a: &[f64], v: &[f64]) -> f64 {
        match self {
            Variant::OnesidedA1First => a1_plus(a, v).0,
            Variant::TwoSidedA1 => a1(a, v),
        }
    }

    /// LHS/RHS with the constant taken at the budget `δ`.
    fn ratio(self, a: &[f64], v: &[f64], r: f64, c: f64) -> f64 {
        let lens = a.windows(2).map(|p| p[1] - p[0]);
        let lhs: f64 = v.iter().zip(lens).map(|(x, l)| x.powf(r) * l).sum();
        let len = a[a.len() - 1] - a[0];
        match self {
            Variant::OnesidedA1First => {
                let (_, mass, mminus) = a1_plus(a, v);
                lhs / (c * mminus.powf(r - 1.0) * mass)
            }
            Variant::TwoSidedA1 => {
                let mass: f64 = v.iter().zip(a.windows(2)).map(|(x, p)| x * (p[1] - p[0])).sum();
                (lhs / len) / (c * (mass / len).powf(r))
            }
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.theorem().as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "t3.1" | "t3_1" => Ok(Variant::OnesidedA1First),
            other => Variant::from_theorem(other.parse()?),
        }
    }
}

impl Serialize for Variant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.theorem().as_str())
    }
}

/// `([w]_{A₁⁺}, ∫w, M⁻(w)(b))` on `(a₀, a_m)`. With `W` the primitive,
/// `M⁻` just right of `a_k` is the largest slope from an earlier vertex of
/// the graph of `W` to `(a_k, W(a_k))`, a tangent to the lower convex hull
/// of those vertices, and the ratio `M⁻/w` peaks there on each piece.
fn a1_plus(a: &[f64], v: &[f64]) -> (f64, f64, f64) {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(a.len());
    let slope = |p: (f64, f64), q: (f64, f64)| (q.1 - p.1) / (q.0 - p.0);
    let tangent = |hull: &[(f64, f64)], p: (f64, f64)| {
        // slope(h_i, p) rises until the tangent vertex, then falls
        let (mut lo, mut hi) = (0, hull.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if slope(hull[mid + 1], p) >= slope(hull[mid], p) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        slope(hull[lo], p)
    };
    let mut best = 1.0f64;
    let mut w = 0.0;
    for k in 0..v.len() {
        let p = (a[k], w);
        if k > 0 {
            best = best.max(tangent(&hull, p) / v[k]);
        }
        while hull.len() >= 2 {
            let (h1, h2) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if slope(h1, h2) >= slope(h2, p) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
        w += v[k] * (a[k + 1] - a[k]);
    }
    let end = (a[v.len()], w);
    (best, w, tangent(&hull, end))
}

/// `[w]_{A₁} = sup_J ⟨w⟩_J / inf_J w`. An interval with breakpoint ends
/// `(a_s, a_t)` can be widened by a sliver into the neighbouring pieces at
/// no cost in average, so its infimum runs over pieces `s − 1 ..= t`.
fn a1(a: &[f64], v: &[f64]) -> f64 {
    let m = v.len();
    let mut best = 1.0f64;
    for s in 0..m {
        let (mut mass, mut min) = (0.0, v[s.saturating_sub(1)].min(v[s]));
        for t in s + 1..=m {
            mass += v[t - 1] * (a[t] - a[t - 1]);
            if t < m {
                min = min.min(v[t]);
            }
            min = min.min(v[t - 1]);
            best = best.max(mass / (a[t] - a[s]) / min);
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub variant: Variant,
    /// Constraint budget `δ ≥ 1`.
    pub delta: f64,
    pub r: f64,
    pub pieces: usize,
    /// Candidate evaluations, shared evenly by the restarts.
    pub budget: usize,
    pub seed: u64,
    pub restarts: usize,
    pub tol: Tolerance,
}

impl SearchConfig {
    pub fn new(variant: Variant, delta: f64, r: f64) -> Self {
        SearchConfig { variant, delta, r, pieces: 1024, budget: 10_000, seed: 0, restarts: 8, tol: Tolerance::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEntry {
    pub restart: usize,
    pub iteration: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchResult {
    pub variant: Variant,
    pub best_ratio: f64,
    /// Budget `δ` used in the constant.
    pub delta: f64,
    /// The witness's own constant as computed by the search, `≤ δ`.
    pub witness_constant: f64,
    #[serde(skip)]
    pub witness: StepWeight,
    pub restart: usize,
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    pub trace_hash: String,
}

struct Run {
    ratio: f64,
    v: Vec<f64>,
    a: Vec<f64>,
    iteration: usize,
    trace: Vec<TraceEntry>,
    evaluations: usize,
}

/// Geometric breakpoints `0, q^{m−1}, …, q, 1` with `q^{m−1} = e^{−span}`.
fn geometric_grid(m: usize, span: f64) -> Vec<f64> {
    let mut a = vec![0.0];
    for k in 1..=m {
        a.push((-span * (m - k) as f64 / (m.max(2) - 1) as f64).exp());
    }
    a
}

/// Cell averages of `x^{τ−1}` on the grid.
fn power_cells(a: &[f64], tau: f64) -> Vec<f64> {
    a.windows(2).map(|p| (p[1].powf(tau) - p[0].powf(tau)) / (tau * (p[1] - p[0]))).collect()
}

fn shrink(v: &[f64], a: &[f64], s: f64) -> Vec<f64> {
    let mass: f64 = v.iter().zip(a.windows(2)).map(|(x, p)| x * (p[1] - p[0])).sum();
    let mean = mass / (a[a.len() - 1] - a[0]);
    v.iter().map(|x| (1.0 - s) * x + s * mean).collect()
}

/// Least shrinkage toward the constant meeting the constraint, by bisection.
fn project(variant: Variant, a: &[f64], v: Vec<f64>, delta: f64) -> Vec<f64> {
    if variant.constant(a, &v) <= delta {
        return v;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if variant.constant(a, &shrink(&v, a, mid)) <= delta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    shrink(&v, a, hi)
}

fn seed_values(cfg: &SearchConfig, restart: usize, a: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    if restart % 4 == 3 {
        let v: Vec<f64> = (0..cfg.pieces).map(|_| rng.gen_range(-1.0f64..1.0).exp()).collect();
        return project(cfg.variant, a, v, cfg.delta);
    }
    // least τ ∈ [1/δ, 1] whose discretized power weight meets the constraint
    let (mut lo, mut hi) = (1.0 / cfg.delta, 1.0);
    if cfg.variant.constant(a, &power_cells(a, lo)) <= cfg.delta {
        hi = lo;
    }
    for _ in 0..40 {
        if hi - lo < 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if cfg.variant.constant(a, &power_cells(a, mid)) <= cfg.delta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    power_cells(a, hi)
}

fn run_restart(cfg: &SearchConfig, restart: usize, c: f64, evaluations: usize) -> Run {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(restart as u64));
    // log-span of the grid: 4, 6, 9, … so different restarts resolve different depths
    let span = 4.0 * 1.5f64.powi((restart % 8) as i32);
    let a = geometric_grid(cfg.pieces, span);
    let mut v = seed_values(cfg, restart, &a, &mut rng);
    let mut best = cfg.variant.ratio(&a, &v, cfg.r, c);
    let mut trace = vec![TraceEntry { restart, iteration: 0, ratio: best }];
    let mut best_iter = 0;
    let mut step = 0.25;
    let mut used = 0;
    let mut order: Vec<usize> = (0..cfg.pieces).collect();
    'outer: while used < evaluations && step > 1e-6 {
        order.shuffle(&mut rng);
        let mut improved = false;
        for &k in &order {
            for dir in [1.0f64, -1.0] {
                if used >= evaluations {
                    break 'outer;
                }
                used += 1;
                let mut cand = v.clone();
                cand[k] *= (dir * step).exp();
                let cand = project(cfg.variant, &a, cand, cfg.delta);
                let ratio = cfg.variant.ratio(&a, &cand, cfg.r, c);
                if ratio > best {
                    best = ratio;
                    v = cand;
                    best_iter = used;
                    improved = true;
                    trace.push(TraceEntry { restart, iteration: used, ratio });
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Run { ratio: best, v, a, iteration: best_iter, trace, evaluations: used }
}

/// Maximizes the variant's ratio over `pieces`-piece weights with constant
/// at most `δ`. The ratio uses the sharp constant at the budget `δ`, so by
/// the inequality it never exceeds 1.
pub fn sharpness_search(cfg: &SearchConfig) -> Result<SearchResult> {
    if !(cfg.delta >= 1.0) || !cfg.delta.is_finite() {
        return Err(Error::Domain(format!("δ must be a finite number ≥ 1, got {}", cfg.delta)));
    }
    if cfg.pieces == 0 || cfg.restarts == 0 {
        return Err(Error::Domain("need at least one piece and one restart".into()));
    }
    let c = sharp_constant(cfg.r, cfg.delta, cfg.variant.theorem(), 1)?;
    let per = (cfg.budget / cfg.restarts).max(1);
    let runs: Vec<Run> = (0..cfg.restarts).into_par_iter().map(|i| run_restart(cfg, i, c, per)).collect();
    let (restart, best) = runs
        .iter()
        .enumerate()
        .fold(None::<(usize, &Run)>, |acc, (i, run)| match acc {
            Some((_, b)) if b.ratio > run.ratio || (b.ratio == run.ratio && b.iteration <= run.iteration) => acc,
            _ => Some((i, run)),
        })
        .expect("at least one restart");
    let trace: Vec<TraceEntry> = runs.iter().flat_map(|r| r.trace.iter().cloned()).collect();
    let mut hasher = Sha256::new();
    for t in &trace {
        hasher.update(t.restart.to_le_bytes());
        hasher.update(t.iteration.to_le_bytes());
        hasher.update(t.ratio.to_bits().to_le_bytes());
    }
    let bps: Vec<Rational> = best.a.iter().map(|&x| from_f64(x)).collect::<Result<_>>()?;
    let vals: Vec<Rational> = best.v.iter().map(|&x| from_f64(x)).collect::<Result<_>>()?;
    Ok(SearchResult {
        variant: cfg.variant,
        best_ratio: best.ratio,
        delta: cfg.delta,
        witness_constant: cfg.variant.constant(&best.a, &best.v),
        witness: StepWeight::new(bps, vals)?.merged(),
        restart,
        iterations: runs.iter().map(|r| r.evaluations).sum(),
        trace,
        trace_hash: hex::encode(hasher.finalize()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{a1_constant, a1_plus_constant};
    use crate::num::{rat, to_f64};

    fn parts(w: &StepWeight) -> (Vec<f64>, Vec<f64>) {
        w.to_f64_parts()
    }

    #[test]
    fn fast_constants_match_exact_engine() {
        let cases = [
            StepWeight::new(vec![rat(0, 1), rat(1, 3), rat(1, 2), rat(1, 1)], vec![rat(5, 1), rat(1, 1), rat(3, 1)]).unwrap(),
            StepWeight::new(vec![rat(0, 1), rat(1, 4), rat(1, 2), rat(3, 4), rat(1, 1)], vec![rat(1, 1), rat(4, 1), rat(2, 1), rat(7, 2)]).unwrap(),
            StepWeight::new(vec![rat(0, 1), rat(1, 8), rat(1, 4), rat(1, 2), rat(1, 1)], vec![rat(8, 1), rat(4, 1), rat(2, 1), rat(1, 1)]).unwrap(),
        ];
        for w in &cases {
            let (a, v) = parts(w);
            assert!((a1_plus(&a, &v).0 - a1_plus_constant(w).value.value).abs() < 1e-12);
            assert!((a1(&a, &v) - a1_constant(w).value.value).abs() < 1e-12);
            let mass = to_f64(&w.total_mass());
            assert!((a1_plus(&a, &v).1 - mass).abs() < 1e-12);
        }
    }

    #[test]
    fn power_seed_meets_the_constraint() {
        let a = geometric_grid(64, 10.0);
        let v = power_cells(&a, 0.5);
        assert!(a1_plus(&a, &v).0 > 2.0);
        let cfg = SearchConfig { pieces: 64, ..SearchConfig::new(Variant::OnesidedA1First, 2.0, 1.5) };
        let s = seed_values(&cfg, 0, &a, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(a1_plus(&a, &s).0 <= 2.0);
    }

    #[test]
    fn search_is_sound_and_deterministic() {
        for variant in [Variant::OnesidedA1First, Variant::TwoSidedA1] {
            let cfg = SearchConfig { pieces: 48, budget: 800, restarts: 4, seed: 3, ..SearchConfig::new(variant, 2.0, 1.5) };
            let a = sharpness_search(&cfg).unwrap();
            assert!(a.best_ratio <= 1.0 + 1e-9, "{variant}: {}", a.best_ratio);
            assert!(a.best_ratio > 0.5);
            assert!(a.witness_constant <= 2.0);
            let b = sharpness_search(&cfg).unwrap();
            assert_eq!(a.trace_hash, b.trace_hash);
            assert_eq!(a.best_ratio, b.best_ratio);
        }
    }

    #[test]
    fn flat_budget_leaves_only_constants() {
        let cfg = SearchConfig { pieces: 16, budget: 200, restarts: 4, ..SearchConfig::new(Variant::OnesidedA1First, 1.0, 1.0) };
        let res = sharpness_search(&cfg).unwrap();
        assert!((res.best_ratio - 1.0).abs() < 1e-12);
        assert!(res.witness.is_constant());
        assert!(sharpness_search(&SearchConfig::new(Variant::OnesidedA1First, 0.5, 1.0)).is_err());
    }

    #[test]
    fn variant_names() {
        assert_eq!("t3.1-first".parse::<Variant>().unwrap(), Variant::OnesidedA1First);
        assert_eq!("T3_1".parse::<Variant>().unwrap(), Variant::OnesidedA1First);
        assert_eq!("bsw-a1".parse::<Variant>().unwrap(), Variant::TwoSidedA1);
        assert!("t1.2".parse::<Variant>().is_err());
    }
}
