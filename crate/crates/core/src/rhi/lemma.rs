//! The superlevel hypothesis `v(E_λ) ≤ δλ|E_λ|` for all `λ ≥ λ₀`, with
//! `E_λ = {v > λ} ∩ Q`, and the reverse Hölder bound it implies.
//!
//! `E_λ` is constant while `λ` runs between consecutive values of `v`, and
//! the hypothesis is linear in `λ` there, so checking the lowest admissible
//! level of every band is enough.

use super::{constant_side, mul, pow_side, power_integral_side, sharp};
use crate::error::{Error, Result};
use crate::geom::Interval;
use crate::num::{format_rational, to_f64, Rational, Tolerance};
use crate::report::{DeltaSource, Params, Side, TheoremId, Verdict, Witness};
use crate::weight::StepWeight;

/// `(u, v(E_u), |E_u|, next level)` for `u` in `{0} ∪ values` below the maximum.
fn bands(v: &StepWeight, q: &Interval) -> Result<Vec<(Rational, Rational, Rational, Rational)>> {
    let r = v.restrict(q)?;
    let mut levels: Vec<Rational> = r.values().to_vec();
    levels.push(Rational::from_integer(0.into()));
    levels.sort();
    levels.dedup();
    Ok(levels
        .windows(2)
        .map(|w| {
            let (u, next) = (&w[0], &w[1]);
            let (mut mass, mut len) = (Rational::from_integer(0.into()), Rational::from_integer(0.into()));
            for (a, b, x) in r.pieces() {
                if x > u {
                    mass += x * (b - a);
                    len += b - a;
                }
            }
            (u.clone(), mass, len, next.clone())
        })
        .collect())
}

/// Levels `λ ≥ λ₀` at which the hypothesis fails (the lowest failing level
/// of each band).
pub fn check_superlevel_hypothesis(v: &StepWeight, q: &Interval, delta: &Rational, lambda0: &Rational) -> Result<Vec<Rational>> {
    let mut bad = Vec::new();
    for (u, mass, len, next) in bands(v, q)? {
        let l = if &u > lambda0 { u } else { lambda0.clone() };
        if l < next && mass > delta * &l * len {
            bad.push(l);
        }
    }
    Ok(bad)
}

/// The least `λ₀` for which the hypothesis holds at every `λ ≥ λ₀`.
pub fn minimal_lambda0(v: &StepWeight, q: &Interval, delta: &Rational) -> Result<Rational> {
    if delta <= &Rational::from_integer(0.into()) {
        return Err(Error::Domain("δ must be positive".into()));
    }
    let mut best = Rational::from_integer(0.into());
    for (u, mass, len, next) in bands(v, q)? {
        let t = mass / (delta * len);
        if t > u {
            let end = if t < next { t } else { next };
            if end > best {
                best = end;
            }
        }
    }
    Ok(best)
}

/// `⟨v^r⟩_Q ≤ λ₀^{r−1}(r′−1)/(r′−δ)·⟨v⟩_Q`; `λ₀` defaults to the minimal one.
/// A `λ₀` violating the hypothesis is a domain error.
pub fn verify_master_lemma(v: &StepWeight, q: &Interval, r: f64, delta: &Rational, lambda0: Option<Rational>, tol: Tolerance) -> Result<Verdict> {
    if delta < &Rational::from_integer(1.into()) {
        return Err(Error::Domain(format!("δ must be at least 1, got {}", format_rational(delta))));
    }
    let lambda0 = match lambda0 {
        Some(l) => l,
        None => minimal_lambda0(v, q, delta)?,
    };
    if let Some(l) = check_superlevel_hypothesis(v, q, delta, &lambda0)?.first() {
        return Err(Error::Domain(format!("superlevel hypothesis fails at λ = {}", format_rational(l))));
    }
    sharp::admissible_range(to_f64(delta), TheoremId::L2_2, 1)?;
    let c = constant_side(r, delta, TheoremId::L2_2)?;
    let inv_len = Side::Exact(q.length().recip());
    let lhs = mul(power_integral_side(v, q, r)?, inv_len.clone());
    let rhs = mul(mul(pow_side(&lambda0, r - 1.0), c), Side::Exact(v.average(q)?));
    let p = Params {
        r: Some(r),
        delta: Some(to_f64(delta)),
        n: Some(1),
        lambda0: Some(to_f64(&lambda0)),
        interval: Some(q.clone()),
        ..Default::default()
    };
    Ok(Verdict::compare(TheoremId::L2_2, p, lhs, rhs, tol, DeltaSource::Given).with_witness(Some(Witness::Level(lambda0))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};

    fn v() -> StepWeight {
        StepWeight::new(vec![int(0), rat(1, 2), rat(3, 4), int(1)], vec![int(1), int(2), int(4)]).unwrap()
    }

    /// Dense scan of the hypothesis in λ as an independent oracle.
    fn scan_ok(v: &StepWeight, q: &Interval, delta: f64, lambda0: f64) -> bool {
        (0..4000).all(|k| {
            let l = lambda0 + k as f64 * 1e-3;
            let (mut m, mut len) = (0.0, 0.0);
            for (a, b, x) in v.pieces() {
                if to_f64(x) > l {
                    m += to_f64(x) * to_f64(&(b - a));
                    len += to_f64(&(b - a));
                }
            }
            m <= delta * l * len * (1.0 + 1e-12) || len == 0.0
        }) && q.length() > int(0)
    }

    #[test]
    fn minimal_level_is_tight() {
        let w = v();
        let q = w.support();
        let d = rat(3, 2);
        let l0 = minimal_lambda0(&w, &q, &d).unwrap();
        assert!(check_superlevel_hypothesis(&w, &q, &d, &l0).unwrap().is_empty());
        assert!(scan_ok(&w, &q, 1.5, to_f64(&l0)));
        let below = &l0 - rat(1, 1000);
        assert!(!check_superlevel_hypothesis(&w, &q, &d, &below).unwrap().is_empty());
        assert!(!scan_ok(&w, &q, 1.5, to_f64(&below)));
    }

    #[test]
    fn conclusion_holds_for_admissible_r() {
        let w = v();
        let q = w.support();
        let d = rat(3, 2);
        for r in [1.0, 1.5, 2.0, 2.5, 2.9] {
            let verdict = verify_master_lemma(&w, &q, r, &d, None, Tolerance::default()).unwrap();
            assert!(verdict.holds, "r={r}: {verdict:?}");
        }
        assert!(verify_master_lemma(&w, &q, 3.0, &d, None, Tolerance::default()).is_err());
        assert!(verify_master_lemma(&w, &q, 2.0, &d, Some(int(1)), Tolerance::default()).is_err());
    }

    #[test]
    fn constant_profile() {
        let c = StepWeight::new(vec![int(0), int(2)], vec![int(6)]).unwrap();
        let q = c.support();
        assert_eq!(minimal_lambda0(&c, &q, &int(2)).unwrap(), int(3));
        let verdict = verify_master_lemma(&c, &q, 2.0, &int(1), None, Tolerance::default()).unwrap();
        assert!(verdict.exact && verdict.holds);
        assert_eq!(verdict.ratio.value, 1.0);
    }
}
