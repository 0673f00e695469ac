//! Rearrangement estimates: the `A_∞` bound for the rearranged maximal
//! function, the Wik power bound, and the embedding inequalities.

use super::{escalate, exact_delta, grid_delta, VerifyParams};
use crate::error::{Error, Result};
use crate::geom::Interval;
use crate::maximal1d::{maximal_profile, rearrangement, Op};
use crate::num::{from_f64, to_f64, Rational, Tolerance};
use crate::report::{DeltaSource, Params, Side, TheoremId, Verdict, Witness};
use crate::weight::StepWeight;

const SAMPLES: usize = 64;

fn worst(ratios: impl Iterator<Item = (f64, f64, f64)>) -> (f64, f64, f64) {
    ratios.fold((0.0, 0.0, 0.0), |acc, x| {
        let r = |(l, h, _): (f64, f64, f64)| if h > 0.0 { l / h } else { f64::INFINITY };
        if r(x) > r(acc) || acc.1 == 0.0 {
            x
        } else {
            acc
        }
    })
}

/// `(1/t)∫₀^t M(w·1_I)* ≤ δ·M(w·1_I)*(t)` at every `t = |{M > λ}|` for
/// critical `λ`, at `t = |I|`, and at 64 interior samples; δ is the grid
/// Fujii–Wilson bound, escalated in depth on failure.
pub fn verify_rearrangement_lemma(w: &StepWeight, i: &Interval, p: &VerifyParams) -> Result<Verdict> {
    let prof = maximal_profile(w, i, Op::M)?.to_f64();
    let (a, b) = (to_f64(&i.lo), to_f64(&i.hi));
    let len = b - a;
    let mut ts: Vec<f64> = Vec::new();
    for s in &prof.segments {
        for y in [s.eval(&s.lo), s.eval(&s.hi)] {
            ts.push(prof.distribution_f64(a, b, y, false));
            ts.push(prof.distribution_f64(a, b, y, true));
        }
    }
    ts.extend((1..=SAMPLES).map(|k| len * k as f64 / (SAMPLES + 1) as f64));
    ts.push(len);
    ts.retain(|t| *t > 0.0 && *t <= len);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let pts: Vec<(f64, f64, f64)> = ts.iter().map(|&t| (prof.rearranged_integral_f64(a, b, t) / t, prof.rearranged_f64(a, b, t), t)).collect();
    escalate(p, |depth| {
        let (delta, src) = grid_delta(w, depth, false);
        let (lhs, rhs, t) = worst(pts.iter().map(|&(l, m, t)| (l, delta * m, t)));
        let params = Params { delta: Some(delta), depth: Some(depth), n: Some(1), interval: Some(i.clone()), ..Default::default() };
        let v = Verdict::compare(TheoremId::LRearInfty, params, Side::Approx(lhs), Side::Approx(rhs), p.tol, src);
        Ok(v.with_witness(Some(Witness::Point(from_f64(t)?))))
    })
}

/// `∫₀^t w* ≤ (t/|I|)^{1/δ} ∫₀^{|I|} w*` at the breakpoints of `w*` and 64
/// samples; the hypothesis is `δ ≥ [w]_{A₁}`.
pub fn verify_wik_bound(w: &StepWeight, i: &Interval, delta: f64, tol: Tolerance) -> Result<Verdict> {
    if !(delta >= 1.0) {
        return Err(Error::Domain(format!("δ must be at least 1, got {delta}")));
    }
    let ws = rearrangement(w, i)?;
    let len = i.length();
    let total = ws.total_mass();
    let mut ts: Vec<Rational> = ws.breakpoints()[1..].to_vec();
    ts.extend((1..=SAMPLES as i64).map(|k| &len * Rational::new(k.into(), (SAMPLES as i64 + 1).into())));
    let (lf, tf) = (to_f64(&len), to_f64(&total));
    let mut best: Option<(f64, f64, Rational)> = None;
    for t in ts {
        let lhs = to_f64(&ws.cumulative(&t));
        let rhs = (to_f64(&t) / lf).powf(1.0 / delta) * tf;
        if best.as_ref().is_none_or(|(l, h, _)| lhs / rhs > l / h) {
            best = Some((lhs, rhs, t));
        }
    }
    let (lhs, rhs, t) = best.expect("at least one sample");
    let params = Params { delta: Some(delta), n: Some(1), interval: Some(i.clone()), ..Default::default() };
    Ok(Verdict::compare(TheoremId::WikBound, params, Side::Approx(lhs), Side::Approx(rhs), tol, DeltaSource::Given).with_witness(Some(Witness::Point(t))))
}

/// Which embedding inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Embedding {
    /// `w(E)/w(I) ≤ δ(|E|/|I|)^{1/δ}` with `δ = [w]_{A₁}`.
    A1,
    /// `∫_E M(w·1_I)/∫_I M(w·1_I) ≤ δ(|E|/|I|)^{1/δ}` with the grid Fujii–Wilson δ.
    Ainfty,
}

/// The pieces of `w` on `I` where it attains its maximum.
pub fn default_embedding_sets(w: &StepWeight, i: &Interval, _which: Embedding) -> Result<Vec<Interval>> {
    let r = w.restrict(i)?.merged();
    let top = r.max_value().clone();
    r.pieces().filter(|(_, _, v)| **v == top).map(|(a, b, _)| Interval::new(a.clone(), b.clone())).collect()
}

fn check_sets(i: &Interval, sets: &[Interval]) -> Result<Rational> {
    let mut sorted = sets.to_vec();
    sorted.sort_by(|x, y| x.lo.cmp(&y.lo));
    for pair in sorted.windows(2) {
        if pair[1].lo < pair[0].hi {
            return Err(Error::Domain(format!("sets {} and {} overlap", pair[0], pair[1])));
        }
    }
    if let Some(bad) = sorted.iter().find(|e| !i.contains_interval(e)) {
        return Err(Error::Domain(format!("set {bad} is not inside {i}")));
    }
    if sorted.is_empty() {
        return Err(Error::Domain("need at least one set".into()));
    }
    Ok(sorted.iter().map(|e| e.length()).sum())
}

pub fn verify_embedding(w: &StepWeight, i: &Interval, sets: &[Interval], which: Embedding, p: &VerifyParams) -> Result<Verdict> {
    let e_len = check_sets(i, sets)?;
    let frac = to_f64(&(&e_len / i.length()));
    let witness = Some(Witness::Interval(sets[0].clone()));
    match which {
        Embedding::A1 => {
            let (delta, kind) = exact_delta(w, false);
            let d = to_f64(&delta);
            let mut we = Rational::from_integer(0.into());
            for e in sets {
                we += w.mass(e)?;
            }
            let lhs = we / w.mass(i)?;
            let rhs = d * frac.powf(1.0 / d);
            let params = Params { delta: Some(d), n: Some(1), interval: Some(i.clone()), ..Default::default() };
            Ok(Verdict::compare(TheoremId::EmbCorI, params, Side::Exact(lhs), Side::Approx(rhs), p.tol, DeltaSource::Exact(kind)).with_witness(witness))
        }
        Embedding::Ainfty => {
            let prof = maximal_profile(w, i, Op::M)?;
            let whole = prof.integrate_over(i)?;
            let mut part = 0.0;
            for e in sets {
                part += prof.integrate_over(e)?;
            }
            escalate(p, |depth| {
                let (d, src) = grid_delta(w, depth, false);
                let rhs = d * frac.powf(1.0 / d);
                let params = Params { delta: Some(d), depth: Some(depth), n: Some(1), interval: Some(i.clone()), ..Default::default() };
                Ok(Verdict::compare(TheoremId::EmbCorII, params, Side::Approx(part / whole), Side::Approx(rhs), p.tol, src).with_witness(witness.clone()))
            })
        }
    }
}
