//! The power weights `w_τ(x) = x^{τ−1}` on `(0, 1)`: closed-form values,
//! step discretizations, and a derivative-free sharpness search.

pub mod search;

pub use search::{sharpness_search, SearchConfig, SearchResult, Variant};

use crate::error::{Error, Result};
use crate::num::{from_f64, rat, Rational};
use crate::weight::StepWeight;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PowerQuery {
    /// `∫₀^t w_τ`
    Mass(f64),
    MMinus(f64),
    MMinus2(f64),
    A1Plus,
    /// `∫₀¹ (τ^{−1}w_τ)^r = ∫₀¹ M⁻(w_τ·1)^r`
    AvgPower(f64),
}

/// `0 < τ < 1`, or a domain error.
pub fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("power exponent τ must lie in (0, 1), got {tau}")))
    }
}

/// Closed forms for `w_τ` on `(0, 1)`: `M⁻(w_τ·1)(x) = τ^{−1}x^{τ−1}`,
/// `M⁻₍₂₎(w_τ·1)(x) = τ^{−2}x^{τ−1}`, `[w_τ]_{A₁⁺} = 1/τ`.
pub fn power_oracle(tau: f64, q: PowerQuery) -> Result<f64> {
    check_tau(tau)?;
    let unit = |x: f64| {
        if (0.0..=1.0).contains(&x) {
            Ok(())
        } else {
            Err(Error::Domain(format!("query point {x} is outside [0, 1]")))
        }
    };
    match q {
        PowerQuery::Mass(t) => {
            unit(t)?;
            Ok(t.powf(tau) / tau)
        }
        PowerQuery::MMinus(x) => {
            unit(x)?;
            Ok(x.powf(tau - 1.0) / tau)
        }
        PowerQuery::MMinus2(x) => {
            unit(x)?;
            Ok(x.powf(tau - 1.0) / (tau * tau))
        }
        PowerQuery::A1Plus => Ok(1.0 / tau),
        PowerQuery::AvgPower(r) => {
            let denom = (tau - 1.0) * r + 1.0;
            if denom <= 0.0 {
                return Err(Error::Range(format!("∫ w_τ^r diverges for r ≥ 1/(1 − τ) = {}", 1.0 / (1.0 - tau))));
            }
            Ok(tau.powf(-r) / denom)
        }
    }
}

/// `m` equal pieces on `(0, 1)` carrying the cell averages of `w_τ`; values
/// are the exact binary expansions of the f64 averages.
pub fn step_discretize(tau: f64, m: usize) -> Result<StepWeight> {
    check_tau(tau)?;
    if m == 0 {
        return Err(Error::Domain("need at least one piece".into()));
    }
    let mf = m as f64;
    let bps: Vec<Rational> = (0..=m).map(|k| rat(k as i64, m as i64)).collect();
    let vals = (1..=m)
        .map(|k| {
            let (a, b) = ((k - 1) as f64 / mf, k as f64 / mf);
            from_f64(mf * (b.powf(tau) - a.powf(tau)) / tau)
        })
        .collect::<Result<Vec<_>>>()?;
    StepWeight::new(bps, vals)
}
