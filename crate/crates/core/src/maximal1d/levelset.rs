//! Superlevel sets of profiles and the rising-sun decompositions.

use num_traits::Signed;
use serde::Serialize;

use super::profile::{maximal_profile_window, MaximalProfile};
use super::Op;
use crate::error::{Error, Result};
use crate::geom::Interval;
use crate::num::Rational;
use crate::weight::StepWeight;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Component {
    pub interval: Interval,
    pub touches_left: bool,
    pub touches_right: bool,
    pub interior: bool,
}

/// Outcome of the certification checks attached to a rising-sun run;
/// `None` when a check does not apply to the decomposition.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RisingSunChecks {
    /// `w((a_j, b_j) ∩ I) = λ|(a_j, b_j)|`, per component.
    pub mass_identity: Option<Vec<bool>>,
    pub maximality: Option<bool>,
    pub endpoint_averages: Option<bool>,
    pub localization: Option<bool>,
}

impl RisingSunChecks {
    pub fn all_pass(&self) -> bool {
        self.mass_identity.as_ref().is_none_or(|v| v.iter().all(|&b| b))
            && self.maximality != Some(false)
            && self.endpoint_averages != Some(false)
            && self.localization != Some(false)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSetDecomposition {
    #[serde(serialize_with = "ser_rat")]
    pub lambda: Rational,
    pub source: Interval,
    pub components: Vec<Component>,
    pub checks: RisingSunChecks,
}

fn ser_rat<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::num::format_rational(r))
}

impl LevelSetDecomposition {
    pub fn intervals(&self) -> Vec<Interval> {
        self.components.iter().map(|c| c.interval.clone()).collect()
    }

    /// Components intersected with the source interval.
    pub fn clipped(&self) -> Vec<Interval> {
        self.components.iter().filter_map(|c| c.interval.intersect(&self.source)).collect()
    }
}

fn open_part(seg: &super::Segment<Rational>, lambda: &Rational) -> Option<(Rational, Rational)> {
    if seg.is_const() {
        return (&seg.v > lambda).then(|| (seg.lo.clone(), seg.hi.clone()));
    }
    let gl = seg.eval(&seg.lo);
    let gh = seg.eval(&seg.hi);
    match (&gl > lambda, &gh > lambda) {
        (true, true) => Some((seg.lo.clone(), seg.hi.clone())),
        (false, false) => None,
        (left_high, _) => {
            // v + k/(q − x) = λ
            let x = &seg.q - &seg.k / (lambda - &seg.v);
            if left_high {
                (x > seg.lo).then(|| (seg.lo.clone(), x))
            } else {
                (x < seg.hi).then(|| (x, seg.hi.clone()))
            }
        }
    }
}

/// Components of `{x ∈ domain : p(x) > λ}`; points at level exactly `λ` are excluded.
pub fn superlevel_set(p: &MaximalProfile, lambda: &Rational) -> Result<LevelSetDecomposition> {
    if !lambda.is_positive() {
        return Err(Error::Domain("level must be positive".into()));
    }
    let mut comps: Vec<(Rational, Rational)> = Vec::new();
    for seg in &p.segments {
        let Some((a, b)) = open_part(seg, lambda) else { continue };
        if let Some(last) = comps.last_mut() {
            if last.1 == a && a == seg.lo && &p.eval(&a) > lambda {
                last.1 = b;
                continue;
            }
        }
        comps.push((a, b));
    }
    let source = p.source_interval();
    let components = comps
        .into_iter()
        .map(|(a, b)| {
            let touches_left = a <= source.lo;
            let touches_right = b >= source.hi;
            Component { interval: Interval { lo: a, hi: b }, touches_left, touches_right, interior: !touches_left && !touches_right }
        })
        .collect();
    Ok(LevelSetDecomposition { lambda: lambda.clone(), source, components, checks: RisingSunChecks::default() })
}

/// `|{x ∈ I : p(x) > λ}|` for the profile's source interval `I`.
pub fn profile_distribution(p: &MaximalProfile, lambda: &Rational) -> Result<Rational> {
    let d = superlevel_set(p, lambda)?;
    Ok(d.clipped().iter().map(|j| j.length()).sum())
}

fn mass_clipped(w: &StepWeight, a: &Rational, b: &Rational) -> Rational {
    w.cumulative(b) - w.cumulative(a)
}

/// Components of `{M⁻(w·1_I) > λ}` over `[lo(I), ∞)`, with the mass identity
/// `w((a_j, b_j) ∩ I) = λ(b_j − a_j)` certified for every component.
pub fn rising_sun_minus(w: &StepWeight, i: &Interval, lambda: &Rational) -> Result<LevelSetDecomposition> {
    if !lambda.is_positive() {
        return Err(Error::Domain("level must be positive".into()));
    }
    let r = w.restrict(i)?;
    let reach = r.total_mass() / lambda;
    let window = Interval::new(i.lo.clone(), &i.hi + reach)?;
    let p = maximal_profile_window(&r, i, Op::MMinus, &window)?;
    let mut d = superlevel_set(&p, lambda)?;
    let identity =
        d.components.iter().map(|c| mass_clipped(&r, &c.interval.lo, &c.interval.hi) == lambda * c.interval.length()).collect();
    d.checks.mass_identity = Some(identity);
    Ok(d)
}

/// Components of `{Mw > λ}` over the whole line, certified by the maximality,
/// endpoint-average and localization checks.
pub fn rising_sun_two_sided(w: &StepWeight, lambda: &Rational) -> Result<LevelSetDecomposition> {
    if !lambda.is_positive() {
        return Err(Error::Domain("level must be positive".into()));
    }
    let sup = w.support();
    let reach = w.total_mass() / lambda;
    let window = Interval::new(&sup.lo - &reach, &sup.hi + &reach)?;
    let p = maximal_profile_window(w, &sup, Op::M, &window)?;
    let mut d = superlevel_set(&p, lambda)?;
    let comps = d.intervals();
    let avg = |a: &Rational, b: &Rational| mass_clipped(w, a, b) / (b - a);

    let mut ends: Vec<Rational> = w.breakpoints().to_vec();
    for c in &comps {
        ends.push(c.lo.clone());
        ends.push(c.hi.clone());
    }
    ends.sort();
    ends.dedup();
    let mut maximality = true;
    for (ia, a) in ends.iter().enumerate() {
        for b in &ends[ia + 1..] {
            if &avg(a, b) > lambda && !comps.iter().any(|c| &c.lo <= a && b <= &c.hi) {
                maximality = false;
            }
        }
    }

    let mut endpoint_averages = true;
    for c in &comps {
        let inner: Vec<&Rational> = w.breakpoints().iter().filter(|x| **x > c.lo && **x < c.hi).collect();
        for x in inner.iter().copied().chain(std::iter::once(&c.hi)) {
            endpoint_averages &= &avg(&c.lo, x) <= lambda;
        }
        for x in inner.iter().copied().chain(std::iter::once(&c.lo)) {
            endpoint_averages &= &avg(x, &c.hi) <= lambda;
        }
    }

    let mut localization = true;
    for c in &comps {
        let Some(core) = c.intersect(&sup) else { continue };
        let local = maximal_profile_window(w, &core, Op::M, c)?;
        let mut xs: Vec<Rational> = Vec::new();
        for s in local.segments.iter().chain(p.segments.iter()) {
            for x in [&s.lo, &s.hi] {
                if x > &c.lo && x < &c.hi {
                    xs.push(x.clone());
                }
            }
            if s.lo >= c.lo && s.hi <= c.hi {
                xs.push(s.lo.clone() / Rational::from_integer(3.into()) + s.hi.clone() * Rational::new(2.into(), 3.into()));
            }
        }
        for k in 1..8i64 {
            xs.push(&c.lo + c.length() * Rational::new(k.into(), 8.into()));
        }
        for x in &xs {
            if local.eval(x) != p.eval(x) {
                localization = false;
            }
        }
    }
    d.checks = RisingSunChecks { mass_identity: None, maximality: Some(maximality), endpoint_averages: Some(endpoint_averages), localization: Some(localization) };
    Ok(d)
}
