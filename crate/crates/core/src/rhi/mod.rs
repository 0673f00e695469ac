//! Sharp constants and verdicts for the one-dimensional reverse Hölder and
//! endpoint inequalities.

pub mod lemma;
pub mod rearr;
pub mod sharp;

pub use lemma::{check_superlevel_hypothesis, minimal_lambda0, verify_master_lemma};
pub use rearr::{default_embedding_sets, verify_embedding, verify_rearrangement_lemma, verify_wik_bound, Embedding};
pub use sharp::{admissible_range, sharp_constant, sharp_constant_exact, superlevel_factor};

use crate::constants::{a1_constant, a1_plus_constant, fujii_wilson_constant, fujii_wilson_plus_constant, RefinementGrid, DEFAULT_DEPTH};
use crate::error::{Error, Result};
use crate::extremal::{check_tau, power_oracle, PowerQuery};
use crate::geom::Interval;
use crate::maximal1d::{eval_maximal, eval_mminus2, maximal_profile, weak_lorentz_norm, Op, Profile};
use crate::num::{as_small_int, from_f64, rpow, to_f64, Rational, Tolerance};
use crate::report::{ConstantKind, DeltaSource, Params, Side, TheoremId, Verdict, Witness};
use crate::weight::StepWeight;

/// Inputs of [`verify`]; unused fields are ignored by ids that do not need them.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyParams {
    pub r: Option<f64>,
    /// Defaults to the support of the weight.
    pub interval: Option<Interval>,
    /// `a < b < c` for the second forms; defaults to the support ends and its midpoint.
    pub triple: Option<(Rational, Rational, Rational)>,
    /// Starting refinement depth for grid lower bounds of δ.
    pub depth: u32,
    /// Failing verdicts with a grid δ are retried up to this depth.
    pub max_depth: u32,
    pub tol: Tolerance,
    /// δ for the statements that take it as a hypothesis (master lemma, Wik bound).
    pub delta: Option<f64>,
    pub lambda0: Option<Rational>,
    /// Test sets for the embedding inequalities.
    pub sets: Vec<Interval>,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            r: None,
            interval: None,
            triple: None,
            depth: DEFAULT_DEPTH,
            max_depth: 10,
            tol: Tolerance::default(),
            delta: None,
            lambda0: None,
            sets: Vec::new(),
        }
    }
}

impl VerifyParams {
    pub fn with_r(r: f64) -> Self {
        VerifyParams { r: Some(r), ..Default::default() }
    }

    fn r(&self, id: TheoremId) -> Result<f64> {
        self.r.ok_or_else(|| Error::Domain(format!("{id} needs an exponent r")))
    }
}

pub(crate) fn pow_side(x: &Rational, r: f64) -> Side {
    match as_small_int(r) {
        Some(k) if k >= 0 => Side::Exact(rpow(x, k)),
        _ => Side::Approx(to_f64(x).powf(r)),
    }
}

pub(crate) fn mul(a: Side, b: Side) -> Side {
    match (a, b) {
        (Side::Exact(x), Side::Exact(y)) => Side::Exact(x * y),
        (a, b) => Side::Approx(a.value() * b.value()),
    }
}

/// `∫_J w^r`, exact for integer `r ≥ 0`.
pub(crate) fn power_integral_side(w: &StepWeight, j: &Interval, r: f64) -> Result<Side> {
    let rw = w.restrict(j)?;
    Ok(match as_small_int(r) {
        Some(k) if k >= 0 => Side::Exact(rw.pieces().map(|(a, b, v)| rpow(v, k) * (b - a)).sum()),
        _ => Side::Approx(rw.pieces().map(|(a, b, v)| to_f64(v).powf(r) * to_f64(&(b - a))).sum()),
    })
}

/// The sharp constant as an exact rational when `r` is an integer and δ exact.
fn constant_side(r: f64, delta: &Rational, id: TheoremId) -> Result<Side> {
    match as_small_int(r) {
        Some(k) if k >= 1 => Ok(Side::Exact(sharp_constant_exact(k as u32, delta, id, 1)?)),
        _ => Ok(Side::Approx(sharp_constant(r, to_f64(delta), id, 1)?)),
    }
}

fn params(r: f64, delta: f64, depth: Option<u32>, i: &Interval) -> Params {
    Params { r: Some(r), delta: Some(delta), n: Some(1), depth, interval: Some(i.clone()), ..Default::default() }
}

/// Retries `f` at increasing depth while its verdict fails.
fn escalate(p: &VerifyParams, f: impl Fn(u32) -> Result<Verdict>) -> Result<Verdict> {
    let mut d = p.depth;
    let mut v = f(d)?;
    while !v.holds && d < p.max_depth {
        d += 1;
        v = f(d)?;
    }
    Ok(v)
}

fn exact_delta(w: &StepWeight, plus: bool) -> (Rational, ConstantKind) {
    let rep = if plus { a1_plus_constant(w) } else { a1_constant(w) };
    (rep.exact_value.expect("A1-type constants are exact"), rep.kind)
}

fn grid_delta(w: &StepWeight, depth: u32, plus: bool) -> (f64, DeltaSource) {
    let grid = RefinementGrid::for_weight(w, depth);
    let rep = if plus { fujii_wilson_plus_constant(w, &grid) } else { fujii_wilson_constant(w, &grid) };
    (rep.value.value, DeltaSource::GridLowerBound { kind: rep.kind, depth })
}

/// `r_w = δ/(δ − 1)`, infinite at `δ = 1`.
fn endpoint_exponent(delta: f64) -> f64 {
    if delta <= 1.0 {
        f64::INFINITY
    } else {
        delta / (delta - 1.0)
    }
}

fn quad_budget(tol: Tolerance, scale: f64) -> f64 {
    1e-3 * tol.relative * scale.abs().max(f64::MIN_POSITIVE)
}

/// `(∫_I p^r, ∫_I p)` for the profile of `op(w·1_I)`.
fn profile_moments(w: &StepWeight, i: &Interval, op: Op, r: f64, tol: Tolerance) -> Result<(Profile<f64>, f64, f64)> {
    let p = maximal_profile(w, i, op)?.to_f64();
    let (a, b) = (to_f64(&i.lo), to_f64(&i.hi));
    let first = p.integrate(&a, &b);
    let len = b - a;
    let scale = p.sup().powf(r) * len;
    let pr = p.power_integral(&a, &b, r, quad_budget(tol, scale));
    Ok((p, pr, first))
}

fn triple(w: &StepWeight, p: &VerifyParams) -> Result<(Rational, Rational, Rational)> {
    let (a, b, c) = match &p.triple {
        Some(t) => t.clone(),
        None => {
            let s = w.support();
            (s.lo.clone(), s.midpoint(), s.hi.clone())
        }
    };
    if !(a < b && b < c) {
        return Err(Error::Domain("triple must satisfy a < b < c".into()));
    }
    let s = w.support();
    if !s.contains_closed(&a) || !s.contains_closed(&c) {
        return Err(Error::Domain("triple must lie inside the support".into()));
    }
    Ok((a, b, c))
}

/// Evaluates the inequality `id` on `w`.
pub fn verify(id: TheoremId, w: &StepWeight, p: &VerifyParams) -> Result<Verdict> {
    use TheoremId::*;
    let i = p.interval.clone().unwrap_or_else(|| w.support());
    if !w.support().contains_interval(&i) {
        return Err(Error::Domain(format!("interval {i} is not inside the support {}", w.support())));
    }
    let tol = p.tol;
    match id {
        T1_3 => endpoint_a1(w, &i, tol),
        BswA1 => bsw(w, &i, p.r(id)?, tol),
        T3_1First => onesided_a1_first(w, &i, p.r(id)?, tol),
        T3_1Second => onesided_a1_second(w, &triple(w, p)?, p.r(id)?, tol),
        TOnesidedEndpointA1 => onesided_endpoint_a1(w, &i, tol),
        T1_2 => {
            let r = p.r(id)?;
            escalate(p, |d| two_sided_profile(w, &i, r, d, tol))
        }
        T1_2Cor | T1_1 => {
            let r = p.r(id)?;
            escalate(p, |d| two_sided_weight(id, w, &i, r, d, tol))
        }
        T3_3 => {
            let r = p.r(id)?;
            escalate(p, |d| onesided_ainfty(w, &i, r, d, tol))
        }
        T3_3CorFirst => {
            let r = p.r(id)?;
            escalate(p, |d| onesided_ainfty_cor_first(w, &i, r, d, tol))
        }
        T3_3CorSecond => {
            let r = p.r(id)?;
            let t = triple(w, p)?;
            escalate(p, |d| onesided_ainfty_cor_second(w, &t, r, d, tol))
        }
        TAinftyEndpoint => escalate(p, |d| endpoint_ainfty(w, &i, d, tol)),
        TOnesidedEndpointAinfty => escalate(p, |d| onesided_endpoint_ainfty(w, &i, d, tol)),
        LRearInfty => verify_rearrangement_lemma(w, &i, p),
        WikBound => {
            let delta = match p.delta {
                Some(d) => d,
                None => to_f64(&exact_delta(w, false).0),
            };
            verify_wik_bound(w, &i, delta, tol)
        }
        EmbCorI | EmbCorII => {
            let which = if id == EmbCorI { Embedding::A1 } else { Embedding::Ainfty };
            let sets = if p.sets.is_empty() { default_embedding_sets(w, &i, which)? } else { p.sets.clone() };
            verify_embedding(w, &i, &sets, which, p)
        }
        L2_2 => {
            let delta = p.delta.ok_or_else(|| Error::Domain("the master lemma needs δ".into()))?;
            verify_master_lemma(w, &i, p.r(id)?, &from_f64(delta)?, p.lambda0.clone(), tol)
        }
        LSuperlevel => Ok(crate::dyadic::verify_superlevel_lemma(&crate::dyadic::DyadicWeight::from_step(w, 12)?)),
        T4_2 | Cor4_3 | Cor3_5 => {
            let dw = crate::dyadic::DyadicWeight::from_step(w, 12)?;
            let r = p.r(id)?;
            match id {
                T4_2 => crate::dyadic::verify_dyadic_rhi(&dw, r, T4_2, tol),
                _ => {
                    let grid = crate::mugrid::MuDyadicGrid::lebesgue_for(&dw)?;
                    let cells = crate::mugrid::MuCellWeight::new(&grid, dw.cells().to_vec())?;
                    crate::mugrid::verify_mu_rhi(&grid, &cells, r, id, tol)
                }
            }
        }
    }
}

/// `‖w‖_{L^{r_w,∞}(I, dx/|I|)} ≤ ⟨w⟩_I` with `δ = [w]_{A₁}`.
fn endpoint_a1(w: &StepWeight, i: &Interval, tol: Tolerance) -> Result<Verdict> {
    let (delta, kind) = exact_delta(w, false);
    let rw = endpoint_exponent(to_f64(&delta));
    let norm = weak_lorentz_norm(w, i, rw)?;
    let avg = w.average(i)?;
    let lhs = if norm.exact { Side::Exact(w.restrict(i)?.max_value().clone()) } else { Side::Approx(norm.value) };
    let v = Verdict::compare(TheoremId::T1_3, params(rw, to_f64(&delta), None, i), lhs, Side::Exact(avg), tol, DeltaSource::Exact(kind));
    Ok(v.with_witness(Some(Witness::Interval(i.clone()))))
}

/// `⟨w^r⟩_I ≤ δ^{1−r}(r′−1)/(r′−δ)·⟨w⟩_I^r` with `δ = [w]_{A₁}`.
fn bsw(w: &StepWeight, i: &Interval, r: f64, tol: Tolerance) -> Result<Verdict> {
    let (delta, kind) = exact_delta(w, false);
    let c = constant_side(r, &delta, TheoremId::BswA1)?;
    let len = i.length();
    let lhs = mul(power_integral_side(w, i, r)?, Side::Exact(len.recip()));
    let rhs = mul(c, pow_side(&w.average(i)?, r));
    let v = Verdict::compare(TheoremId::BswA1, params(r, to_f64(&delta), None, i), lhs, rhs, tol, DeltaSource::Exact(kind));
    Ok(v.with_witness(Some(Witness::Interval(i.clone()))))
}

/// `∫_I w^r ≤ δ^{1−r}(r′−1)/(r′−δ)·M⁻(w·1_I)(b)^{r−1}·w(I)` with `δ = [w]_{A₁⁺}`.
fn onesided_a1_first(w: &StepWeight, i: &Interval, r: f64, tol: Tolerance) -> Result<Verdict> {
    let (delta, kind) = exact_delta(w, true);
    let c = constant_side(r, &delta, TheoremId::T3_1First)?;
    let mb = eval_maximal(w, i, Op::MMinus, &i.hi)?;
    let lhs = power_integral_side(w, i, r)?;
    let rhs = mul(mul(c, pow_side(&mb, r - 1.0)), Side::Exact(w.mass(i)?));
    let v = Verdict::compare(TheoremId::T3_1First, params(r, to_f64(&delta), None, i), lhs, rhs, tol, DeltaSource::Exact(kind));
    Ok(v.with_witness(Some(Witness::Interval(i.clone()))))
}

/// `|(b,c)|^{r−1} ∫_(a,b) w^r ≤ δ^{1−r}(r′−1)/(r′−δ)·w((a,c))^r`.
fn onesided_a1_second(w: &StepWeight, t: &(Rational, Rational, Rational), r: f64, tol: Tolerance) -> Result<Verdict> {
    let (a, b, c) = t;
    let (delta, kind) = exact_delta(w, true);
    let cst = constant_side(r, &delta, TheoremId::T3_1Second)?;
    let ab = Interval::new(a.clone(), b.clone())?;
    let ac = Interval::new(a.clone(), c.clone())?;
    let lhs = mul(pow_side(&(c - b), r - 1.0), power_integral_side(w, &ab, r)?);
    let rhs = mul(cst, pow_side(&w.mass(&ac)?, r));
    let v = Verdict::compare(TheoremId::T3_1Second, params(r, to_f64(&delta), None, &ac), lhs, rhs, tol, DeltaSource::Exact(kind));
    Ok(v.with_witness(Some(Witness::Triple(a.clone(), b.clone(), c.clone()))))
}

/// `‖w‖_{L^{r_w,∞}} ≤ (M⁻(w·1_I)(b)^{r_w−1}·⟨w⟩_I)^{1/r_w}` with `δ = [w]_{A₁⁺}`,
/// compared after taking `r_w`-th roots.
fn onesided_endpoint_a1(w: &StepWeight, i: &Interval, tol: Tolerance) -> Result<Verdict> {
    let (delta, kind) = exact_delta(w, true);
    let rw = endpoint_exponent(to_f64(&delta));
    let mb = to_f64(&eval_maximal(w, i, Op::MMinus, &i.hi)?);
    let avg = to_f64(&w.average(i)?);
    let lhs = weak_lorentz_norm(w, i, rw)?.value;
    let rhs = if rw.is_infinite() { mb } else { mb.powf(1.0 - 1.0 / rw) * avg.powf(1.0 / rw) };
    let v = Verdict::compare(TheoremId::TOnesidedEndpointA1, params(rw, to_f64(&delta), None, i), Side::Approx(lhs), Side::Approx(rhs), tol, DeltaSource::Exact(kind));
    Ok(v.with_witness(Some(Witness::Interval(i.clone()))))
}

/// `⟨M(w·1_I)^r⟩_I ≤ δ^{1−r}(r′−1)/(r′−δ)·⟨M(w·1_I)⟩_I^r`.
fn two_sided_profile(w: &StepWeight, i: &Interval, r: f64, depth: u32, tol: Tolerance) -> Result<Verdict> {
    let (delta, src) = grid_delta(w, depth, false);
    let c = sharp_constant(r, delta, TheoremId::T1_2, 1)?;
    let len = to_f64(&i.length());
    let (_, pr, first) = profile_moments(w, i, Op::M, r, tol)?;
    let lhs = pr / len;
    let rhs = c * (first / len).powf(r);
    let v = Verdict::compare(TheoremId::T1_2, params(r, delta, Some(depth), i), Side::Approx(lhs), Side::Approx(rhs), tol, src);
    Ok(v.with_witness(Some(Witness::Interval(i.clone()))))
}

/// `⟨w^r⟩_I ≤ C·⟨w⟩_I^r` with the grid Fujii–Wilson δ; `C = δ(r′−1)/(r′−δ)`
/// for the corollary, `δ(r′−1)/(r′−1−2(δ−1))` for the one-dimensional case
/// of the `n`-dimensional theorem.
fn two_sided_weight(id: TheoremId, w: &StepWeight, i: &Interval, r: f64, depth: u32, tol: Tolerance) -> Result<Verdict> {
    let (delta, src) = grid_delta(w, depth, false);
    let c = sharp_constant(r, delta, id, 1)?;
    let lhs = w.power_average(i, r)?.value;
    let rhs = c * to_f64(&w.average(i)?).powf(r);
    let v = Verdict::compare(id, params(r, delta, Some(depth), i), Side::Approx(lhs), Side::Approx(rhs), tol, src);
    Ok(v.with_witness(Some(Witness::Interval(i.clone()))))
}

/// `∫_I M⁻(w·1_I)^r ≤ δ^{1−r}(r′−1)/(r′−δ)·M⁻₍₂₎(w·1_I)(b)^{r−1}·∫_I M⁻(w·1_I)`
/// with δ the grid `A_∞⁺` bound; `M⁻₍₂₎(b)` is a lower bound on the same grid.
fn onesided_ainfty(w: &StepWeight, i: &Interval, r: f64, depth: u32, tol: Tolerance) -> Result<Verdict> {
    let (delta, src) = grid_delta(w, depth, true);
    let c = sharp_constant(r, delta, TheoremId::T3_3, 1)?;
    let (_, pr, first) = profile_moments(w, i, Op::MMinus, r, tol)?;
    let (m2, _) = eval_mminus2(w, i, &i.hi, depth)?;
    let rhs = c * m2.value.powf(r - 1.0) * first;
    let v = Verdict::compare(TheoremId::T3_3, params(r, delta, Some(depth), i), Side::Approx(pr), Side::Approx(rhs), tol, src);
    Ok(v.with_witness(Some(Witness::Interval(i.clone()))))
}

/// `∫_I M⁻(w·1_I)^r ≤ δ(r′−1)/(r′−δ)·M⁻(w·1_I)(b)^{r−1}·w(I)`.
fn onesided_ainfty_cor_first(w: &StepWeight, i: &Interval, r: f64, depth: u32, tol: Tolerance) -> Result<Verdict> {
    let (delta, src) = grid_delta(w, depth, true);
    let c = sharp_constant(r, delta, TheoremId::T3_3CorFirst, 1)?;
    let (_, pr, _) = profile_moments(w, i, Op::MMinus, r, tol)?;
    let mb = to_f64(&eval_maximal(w, i, Op::MMinus, &i.hi)?);
    let rhs = c * mb.powf(r - 1.0) * to_f64(&w.mass(i)?);
    let v = Verdict::compare(TheoremId::T3_3CorFirst, params(r, delta, Some(depth), i), Side::Approx(pr), Side::Approx(rhs), tol, src);
    Ok(v.with_witness(Some(Witness::Interval(i.clone()))))
}

/// `|(b,c)|^{r−1} ∫_(a,b) M⁻(w·1_(a,b))^r ≤ δ(r′−1)/(r′−δ)·w((a,c))^r`.
fn onesided_ainfty_cor_second(w: &StepWeight, t: &(Rational, Rational, Rational), r: f64, depth: u32, tol: Tolerance) -> Result<Verdict> {
    let (a, b, c) = t;
    let (delta, src) = grid_delta(w, depth, true);
    let cst = sharp_constant(r, delta, TheoremId::T3_3CorSecond, 1)?;
    let ab = Interval::new(a.clone(), b.clone())?;
    let ac = Interval::new(a.clone(), c.clone())?;
    let (_, pr, _) = profile_moments(w, &ab, Op::MMinus, r, tol)?;
    let lhs = to_f64(&(c - b)).powf(r - 1.0) * pr;
    let rhs = cst * to_f64(&w.mass(&ac)?).powf(r);
    let v = Verdict::compare(TheoremId::T3_3CorSecond, params(r, delta, Some(depth), &ac), Side::Approx(lhs), Side::Approx(rhs), tol, src);
    Ok(v.with_witness(Some(Witness::Triple(a.clone(), b.clone(), c.clone()))))
}

/// `‖M(w·1_I)‖_{L^{r_w,∞}(I, dx/|I|)} ≤ ⟨M(w·1_I)⟩_I`.
fn endpoint_ainfty(w: &StepWeight, i: &Interval, depth: u32, tol: Tolerance) -> Result<Verdict> {
    let (delta, src) = grid_delta(w, depth, false);
    let rw = endpoint_exponent(delta);
    let p = maximal_profile(w, i, Op::M)?.to_f64();
    let (a, b) = (to_f64(&i.lo), to_f64(&i.hi));
    let lhs = p.weak_norm_f64(a, b, rw);
    let rhs = p.integrate(&a, &b) / (b - a);
    let v = Verdict::compare(TheoremId::TAinftyEndpoint, params(rw, delta, Some(depth), i), Side::Approx(lhs), Side::Approx(rhs), tol, src);
    Ok(v.with_witness(Some(Witness::Interval(i.clone()))))
}

/// `‖M⁻(w·1_I)‖_{L^{r_w,∞}} ≤ (M⁻₍₂₎(w·1_I)(b)^{r_w−1}·⟨M⁻(w·1_I)⟩_I)^{1/r_w}`.
fn onesided_endpoint_ainfty(w: &StepWeight, i: &Interval, depth: u32, tol: Tolerance) -> Result<Verdict> {
    let (delta, src) = grid_delta(w, depth, true);
    let rw = endpoint_exponent(delta);
    let p = maximal_profile(w, i, Op::MMinus)?.to_f64();
    let (a, b) = (to_f64(&i.lo), to_f64(&i.hi));
    let lhs = p.weak_norm_f64(a, b, rw);
    let avg = p.integrate(&a, &b) / (b - a);
    let (m2, _) = eval_mminus2(w, i, &i.hi, depth)?;
    let rhs = if rw.is_infinite() { m2.value } else { m2.value.powf(1.0 - 1.0 / rw) * avg.powf(1.0 / rw) };
    let v = Verdict::compare(TheoremId::TOnesidedEndpointAinfty, params(rw, delta, Some(depth), i), Side::Approx(lhs), Side::Approx(rhs), tol, src);
    Ok(v.with_witness(Some(Witness::Interval(i.clone()))))
}

/// Equality case of the one-sided `A_∞⁺` inequality: for `w_τ` on `(0, 1)` and
/// `δ = 1/τ` both `∫₀¹ M⁻(w_τ)^r` and `δ^{1−r}(r′−1)/(r′−δ)·M⁻₍₂₎(1)^{r−1}·∫₀¹ M⁻(w_τ)`
/// equal `τ^{−r}/((τ−1)r + 1)`.
pub fn verify_extremizer_equality(tau: f64, r: f64, tol: Tolerance) -> Result<Verdict> {
    check_tau(tau)?;
    let delta = 1.0 / tau;
    let c = sharp_constant(r, delta, TheoremId::T3_3, 1)?;
    let lhs = power_oracle(tau, PowerQuery::AvgPower(r))?;
    let m2 = power_oracle(tau, PowerQuery::MMinus2(1.0))?;
    // ∫₀¹ M⁻ = τ^{−1} ∫₀¹ w_τ
    let int_m = power_oracle(tau, PowerQuery::Mass(1.0))? / tau;
    let rhs = c * m2.powf(r - 1.0) * int_m;
    let p = Params { r: Some(r), delta: Some(delta), tau: Some(tau), n: Some(1), ..Default::default() };
    Ok(Verdict::compare(TheoremId::T3_3, p, Side::Approx(lhs), Side::Approx(rhs), tol, DeltaSource::ClosedForm))
}
