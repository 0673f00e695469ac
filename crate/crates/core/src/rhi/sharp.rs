//! Sharp multiplicative constants and admissible exponent ranges.
//!
//! With `r' = r/(r − 1)` the factor `(r' − 1)/(r' − 1 − κ(δ − 1))` equals
//! `1/(1 − κ(δ − 1)(r − 1))`, which is how it is evaluated here: no `r'`
//! singularity at `r = 1`. `κ = 1` gives `(r' − 1)/(r' − δ)`.

use crate::error::{Error, Result};
use crate::num::{rpow, Rational};
use crate::report::TheoremId;

/// How a theorem's constant is assembled from the basic factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// `δ^{1−r}/(1 − κ(δ−1)(r−1))`
    Normalized { kappa_dyadic: bool },
    /// `δ/(1 − κ(δ−1)(r−1))`
    Scaled { kappa_dyadic: bool },
    /// `1/(1 − (δ−1)(r−1))`, multiplied by `λ₀^{r−1}` by the caller.
    Bare,
    /// The constant `1` of the weak-type endpoint forms.
    One,
    /// The constant `δ` of the embedding and rearrangement forms.
    Delta,
    /// The factor `c_n(δ)` of the dyadic superlevel estimate.
    Superlevel,
}

pub fn shape(id: TheoremId) -> Shape {
    use TheoremId::*;
    match id {
        T1_2 | T3_1First | T3_1Second | T3_3 | BswA1 => Shape::Normalized { kappa_dyadic: false },
        T4_2 => Shape::Normalized { kappa_dyadic: true },
        T1_2Cor | T3_3CorFirst | T3_3CorSecond => Shape::Scaled { kappa_dyadic: false },
        T1_1 | Cor4_3 | Cor3_5 => Shape::Scaled { kappa_dyadic: true },
        L2_2 => Shape::Bare,
        T1_3 | TAinftyEndpoint | TOnesidedEndpointA1 | TOnesidedEndpointAinfty | WikBound => Shape::One,
        EmbCorI | EmbCorII | LRearInfty => Shape::Delta,
        LSuperlevel => Shape::Superlevel,
    }
}

/// `κ = 2^n` for the dyadic-type statements (`n = 1` for the one-dimensional
/// μ-grid form), `1` otherwise.
fn kappa(id: TheoremId, n: usize) -> f64 {
    match shape(id) {
        Shape::Normalized { kappa_dyadic: true } | Shape::Scaled { kappa_dyadic: true } => {
            let n = if id == TheoremId::Cor3_5 { 1 } else { n };
            2f64.powi(n as i32)
        }
        _ => 1.0,
    }
}

/// Open upper bound of the admissible exponents: `1 + 1/(κ(δ − 1))`, which is
/// `δ/(δ − 1)` for `κ = 1`; `+∞` at `δ = 1`.
pub fn admissible_range(delta: f64, id: TheoremId, n: usize) -> Result<f64> {
    if !(delta >= 1.0) {
        return Err(Error::Domain(format!("δ must be at least 1, got {delta}")));
    }
    if n == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if delta == 1.0 {
        return Ok(f64::INFINITY);
    }
    let k = kappa(id, n);
    Ok(if k == 1.0 { delta / (delta - 1.0) } else { 1.0 + 1.0 / (k * (delta - 1.0)) })
}

fn check_r(r: f64, delta: f64, id: TheoremId, n: usize) -> Result<()> {
    let bound = admissible_range(delta, id, n)?;
    if !(r >= 1.0) || !(r < bound) {
        return Err(Error::Range(format!("exponent r = {r} must satisfy 1 ≤ r < {bound} (δ = {delta}, {id})")));
    }
    Ok(())
}

/// The theorem's multiplicative constant at `(r, δ)`.
pub fn sharp_constant(r: f64, delta: f64, id: TheoremId, n: usize) -> Result<f64> {
    match shape(id) {
        Shape::One => {
            admissible_range(delta, id, n)?;
            return Ok(1.0);
        }
        Shape::Delta => {
            admissible_range(delta, id, n)?;
            return Ok(delta);
        }
        Shape::Superlevel => {
            admissible_range(delta, id, n)?;
            return Ok(delta + ((1u64 << n) - 1) as f64 * (delta - 1.0));
        }
        _ => {}
    }
    check_r(r, delta, id, n)?;
    let base = 1.0 / (1.0 - kappa(id, n) * (delta - 1.0) * (r - 1.0));
    Ok(match shape(id) {
        Shape::Normalized { .. } => delta.powf(1.0 - r) * base,
        Shape::Scaled { .. } => delta * base,
        _ => base,
    })
}

/// Exact constant for integer `r` and rational `δ`.
pub fn sharp_constant_exact(r: u32, delta: &Rational, id: TheoremId, n: usize) -> Result<Rational> {
    let one = Rational::from_integer(1.into());
    match shape(id) {
        Shape::One => return Ok(one),
        Shape::Delta => return Ok(delta.clone()),
        Shape::Superlevel => return Ok(superlevel_factor(delta, n)),
        _ => {}
    }
    check_r(r as f64, crate::num::to_f64(delta), id, n)?;
    let k = Rational::from_float(kappa(id, n)).expect("finite");
    let rm1 = Rational::from_integer((r as i64 - 1).into());
    let base = (&one - k * (delta - &one) * &rm1).recip();
    Ok(match shape(id) {
        Shape::Normalized { .. } => rpow(delta, 1 - r as i32) * base,
        Shape::Scaled { .. } => delta * base,
        _ => base,
    })
}

/// `c_n(δ) = δ + (2^n − 1)(δ − 1)`.
pub fn superlevel_factor(delta: &Rational, n: usize) -> Rational {
    let one = Rational::from_integer(1.into());
    let pow = Rational::from_integer(((1i64 << n) - 1).into());
    delta + pow * (delta - one)
}
