//! Structured results: constant reports and inequality verdicts.

use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geom::Interval;
use crate::num::{format_rational, to_f64, Rational, Real, Tolerance};

/// Every checkable statement known to the engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TheoremId {
    T1_1,
    T1_2,
    T1_2Cor,
    T1_3,
    T3_1First,
    T3_1Second,
    T3_3,
    T3_3CorFirst,
    T3_3CorSecond,
    TAinftyEndpoint,
    TOnesidedEndpointA1,
    TOnesidedEndpointAinfty,
    L2_2,
    LRearInfty,
    WikBound,
    EmbCorI,
    EmbCorII,
    T4_2,
    Cor3_5,
    Cor4_3,
    /// Strong reverse Hölder inequality for `w` itself under an `A₁` bound.
    BswA1,
    /// Superlevel-set estimate for the local dyadic maximal function.
    LSuperlevel,
}

impl TheoremId {
    pub const ALL: [TheoremId; 22] = [
        TheoremId::T1_1,
        TheoremId::T1_2,
        TheoremId::T1_2Cor,
        TheoremId::T1_3,
        TheoremId::T3_1First,
        TheoremId::T3_1Second,
        TheoremId::T3_3,
        TheoremId::T3_3CorFirst,
        TheoremId::T3_3CorSecond,
        TheoremId::TAinftyEndpoint,
        TheoremId::TOnesidedEndpointA1,
        TheoremId::TOnesidedEndpointAinfty,
        TheoremId::L2_2,
        TheoremId::LRearInfty,
        TheoremId::WikBound,
        TheoremId::EmbCorI,
        TheoremId::EmbCorII,
        TheoremId::T4_2,
        TheoremId::Cor3_5,
        TheoremId::Cor4_3,
        TheoremId::BswA1,
        TheoremId::LSuperlevel,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::T1_1 => "t1.1",
            TheoremId::T1_2 => "t1.2",
            TheoremId::T1_2Cor => "t1.2-cor",
            TheoremId::T1_3 => "t1.3",
            TheoremId::T3_1First => "t3.1-first",
            TheoremId::T3_1Second => "t3.1-second",
            TheoremId::T3_3 => "t3.3",
            TheoremId::T3_3CorFirst => "t3.3-cor-first",
            TheoremId::T3_3CorSecond => "t3.3-cor-second",
            TheoremId::TAinftyEndpoint => "t-ainfty-endpoint",
            TheoremId::TOnesidedEndpointA1 => "t-onesided-endpoint-a1",
            TheoremId::TOnesidedEndpointAinfty => "t-onesided-endpoint-ainfty",
            TheoremId::L2_2 => "l2.2",
            TheoremId::LRearInfty => "l-rearinfty",
            TheoremId::WikBound => "wik",
            TheoremId::EmbCorI => "emb-i",
            TheoremId::EmbCorII => "emb-ii",
            TheoremId::T4_2 => "t4.2",
            TheoremId::Cor3_5 => "cor3.5",
            TheoremId::Cor4_3 => "cor4.3",
            TheoremId::BswA1 => "bsw-a1",
            TheoremId::LSuperlevel => "l-superlevel",
        }
    }
}

impl TheoremId {
    /// Upper-case identifier form, e.g. `T3_1_FIRST`.
    pub fn const_name(self) -> &'static str {
        match self {
            TheoremId::T1_1 => "T1_1",
            TheoremId::T1_2 => "T1_2",
            TheoremId::T1_2Cor => "T1_2_COR",
            TheoremId::T1_3 => "T1_3",
            TheoremId::T3_1First => "T3_1_FIRST",
            TheoremId::T3_1Second => "T3_1_SECOND",
            TheoremId::T3_3 => "T3_3",
            TheoremId::T3_3CorFirst => "T3_3_COR_FIRST",
            TheoremId::T3_3CorSecond => "T3_3_COR_SECOND",
            TheoremId::TAinftyEndpoint => "T_AINFTY_ENDPOINT",
            TheoremId::TOnesidedEndpointA1 => "T_ONESIDED_ENDPOINT_A1",
            TheoremId::TOnesidedEndpointAinfty => "T_ONESIDED_ENDPOINT_AINFTY",
            TheoremId::L2_2 => "L2_2",
            TheoremId::LRearInfty => "L_REARINFTY",
            TheoremId::WikBound => "WIK_BOUND",
            TheoremId::EmbCorI => "EMB_COR_I",
            TheoremId::EmbCorII => "EMB_COR_II",
            TheoremId::T4_2 => "T4_2",
            TheoremId::Cor3_5 => "COR3_5",
            TheoremId::Cor4_3 => "COR4_3",
            TheoremId::BswA1 => "BSW_A1",
            TheoremId::LSuperlevel => "L_SUPERLEVEL",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim();
        TheoremId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str().eq_ignore_ascii_case(key) || id.const_name().eq_ignore_ascii_case(key))
            .ok_or_else(|| {
                let known: Vec<&str> = TheoremId::ALL.iter().map(|id| id.as_str()).collect();
                Error::Parse(format!("unknown theorem id {s:?}; known ids: {}", known.join(", ")))
            })
    }
}

impl Serialize for TheoremId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Where a verdict's or a report's maximum was attained.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Interval(Interval),
    /// Dyadic cube as a cell multi-index corner plus its side in cells.
    Cube { corner: Vec<usize>, cells_per_side: usize },
    Level(Rational),
    Point(Rational),
    Triple(Rational, Rational, Rational),
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(2))?;
        match self {
            Witness::Interval(i) => {
                map.serialize_entry("kind", "interval")?;
                map.serialize_entry("interval", i)?;
            }
            Witness::Cube { corner, cells_per_side } => {
                map.serialize_entry("kind", "cube")?;
                map.serialize_entry("corner", corner)?;
                map.serialize_entry("cellsPerSide", cells_per_side)?;
            }
            Witness::Level(l) => {
                map.serialize_entry("kind", "level")?;
                map.serialize_entry("lambda", &format_rational(l))?;
            }
            Witness::Point(x) => {
                map.serialize_entry("kind", "point")?;
                map.serialize_entry("x", &format_rational(x))?;
            }
            Witness::Triple(a, b, c) => {
                map.serialize_entry("kind", "triple")?;
                map.serialize_entry("abc", &[format_rational(a), format_rational(b), format_rational(c)])?;
            }
        }
        map.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstantKind {
    A1,
    A1Plus,
    Ap,
    FujiiWilson,
    FujiiWilsonPlus,
    Khrushchev,
    GurovReshetnyak,
    DyadicFujiiWilson,
    MuStrongFujiiWilson,
}

impl ConstantKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstantKind::A1 => "A1",
            ConstantKind::A1Plus => "A1plus",
            ConstantKind::Ap => "Ap",
            ConstantKind::FujiiWilson => "FujiiWilson",
            ConstantKind::FujiiWilsonPlus => "FujiiWilsonPlus",
            ConstantKind::Khrushchev => "Khrushchev",
            ConstantKind::GurovReshetnyak => "GurovReshetnyak",
            ConstantKind::DyadicFujiiWilson => "DyadicFujiiWilson",
            ConstantKind::MuStrongFujiiWilson => "MuStrongFujiiWilson",
        }
    }
}

impl Serialize for ConstantKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantReport {
    pub kind: ConstantKind,
    pub value: Real,
    /// Present when the value is an exact rational.
    pub exact_value: Option<Rational>,
    pub is_lower_bound: bool,
    pub refinement_depth: u32,
    pub witness: Option<Witness>,
}

impl ConstantReport {
    pub fn exact(kind: ConstantKind, value: Rational, is_lower_bound: bool, depth: u32, witness: Option<Witness>) -> Self {
        ConstantReport {
            kind,
            value: Real::from_rational(&value),
            exact_value: Some(value),
            is_lower_bound,
            refinement_depth: depth,
            witness,
        }
    }

    pub fn approx(kind: ConstantKind, value: f64, depth: u32, witness: Option<Witness>) -> Self {
        ConstantReport {
            kind,
            value: Real::approx(value),
            exact_value: None,
            is_lower_bound: true,
            refinement_depth: depth,
            witness,
        }
    }
}

impl Serialize for ConstantReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        map.serialize_entry("kind", &self.kind)?;
        match &self.exact_value {
            Some(v) => map.serialize_entry("value", &format_rational(v))?,
            None => map.serialize_entry("value", &self.value.value)?,
        }
        map.serialize_entry("approx", &self.value.value)?;
        map.serialize_entry("exact", &self.value.exact)?;
        map.serialize_entry("isLowerBound", &self.is_lower_bound)?;
        map.serialize_entry("refinementDepth", &self.refinement_depth)?;
        map.serialize_entry("witness", &self.witness)?;
        map.end()
    }
}

/// Provenance of the δ used by a verdict.
#[derive(Clone, Debug, PartialEq)]
pub enum DeltaSource {
    Exact(ConstantKind),
    GridLowerBound { kind: ConstantKind, depth: u32 },
    Given,
    ClosedForm,
    NotUsed,
}

impl fmt::Display for DeltaSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaSource::Exact(k) => write!(f, "exact:{}", k.as_str()),
            DeltaSource::GridLowerBound { kind, depth } => write!(f, "grid-lower-bound:{}@depth{}", kind.as_str(), depth),
            DeltaSource::Given => f.write_str("given"),
            DeltaSource::ClosedForm => f.write_str("closed-form"),
            DeltaSource::NotUsed => f.write_str("none"),
        }
    }
}

/// One side of an inequality, exact or floating.
#[derive(Clone, Debug, PartialEq)]
pub enum Side {
    Exact(Rational),
    Approx(f64),
}

impl Side {
    pub fn value(&self) -> f64 {
        match self {
            Side::Exact(r) => to_f64(r),
            Side::Approx(x) => *x,
        }
    }

    fn real(&self) -> Real {
        match self {
            Side::Exact(r) => Real::from_rational(r),
            Side::Approx(x) => Real::approx(*x),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<Interval>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub theorem: TheoremId,
    pub params: Params,
    pub lhs: Real,
    pub rhs: Real,
    pub ratio: Real,
    pub holds: bool,
    pub exact: bool,
    pub tolerance: f64,
    pub delta_source: DeltaSource,
    pub witness: Option<Witness>,
    pub lhs_exact: Option<Rational>,
    pub rhs_exact: Option<Rational>,
}

impl Verdict {
    /// Compares `lhs ≤ rhs` exactly when both sides are exact, and as
    /// `lhs ≤ rhs·(1+tol)` otherwise.
    pub fn compare(theorem: TheoremId, params: Params, lhs: Side, rhs: Side, tol: Tolerance, delta_source: DeltaSource) -> Verdict {
        let (holds, exact) = match (&lhs, &rhs) {
            (Side::Exact(a), Side::Exact(b)) => (a <= b, true),
            _ => (tol.le(lhs.value(), rhs.value()), false),
        };
        let (l, r) = (lhs.value(), rhs.value());
        let ratio_value = if r == 0.0 {
            if l == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            l / r
        };
        let ratio = match (&lhs, &rhs) {
            (Side::Exact(a), Side::Exact(b)) if *b != Rational::from_integer(0.into()) => Real::from_rational(&(a / b)),
            _ => Real::approx(ratio_value),
        };
        Verdict {
            theorem,
            params,
            lhs: lhs.real(),
            rhs: rhs.real(),
            ratio,
            holds,
            exact,
            tolerance: tol.relative,
            delta_source,
            witness: None,
            lhs_exact: if let Side::Exact(a) = lhs { Some(a) } else { None },
            rhs_exact: if let Side::Exact(b) = rhs { Some(b) } else { None },
        }
    }

    pub fn with_witness(mut self, w: Option<Witness>) -> Self {
        self.witness = w;
        self
    }

    /// The verdict with the larger ratio; the first on ties. A failing verdict
    /// always wins over a holding one.
    pub fn worse(self, other: Verdict) -> Verdict {
        match (self.holds, other.holds) {
            (true, false) => other,
            (false, true) => self,
            _ => {
                if other.ratio.value > self.ratio.value {
                    other
                } else {
                    self
                }
            }
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        map.serialize_entry("theorem", &self.theorem)?;
        map.serialize_entry("params", &self.params)?;
        map.serialize_entry("lhs", &self.lhs.value)?;
        map.serialize_entry("rhs", &self.rhs.value)?;
        if let Some(l) = &self.lhs_exact {
            map.serialize_entry("lhsExact", &format_rational(l))?;
        }
        if let Some(r) = &self.rhs_exact {
            map.serialize_entry("rhsExact", &format_rational(r))?;
        }
        map.serialize_entry("ratio", &self.ratio.value)?;
        map.serialize_entry("holds", &self.holds)?;
        map.serialize_entry("exact", &self.exact)?;
        map.serialize_entry("tolerance", &self.tolerance)?;
        map.serialize_entry("deltaSource", &self.delta_source.to_string())?;
        map.serialize_entry("witness", &self.witness)?;
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    #[test]
    fn theorem_ids_round_trip() {
        for id in TheoremId::ALL {
            assert_eq!(id.as_str().parse::<TheoremId>().unwrap(), id);
        }
        assert_eq!("T4_2".parse::<TheoremId>().unwrap(), TheoremId::T4_2);
        assert!("t9.9".parse::<TheoremId>().is_err());
    }

    #[test]
    fn verdict_policy() {
        let tol = Tolerance::default();
        let v = Verdict::compare(TheoremId::T1_3, Params::default(), Side::Exact(rat(1, 3)), Side::Exact(rat(1, 3)), tol, DeltaSource::NotUsed);
        assert!(v.holds && v.exact && v.ratio.value == 1.0);
        let v = Verdict::compare(TheoremId::T1_3, Params::default(), Side::Exact(rat(1, 3) + rat(1, 1_000_000_000_000)), Side::Exact(rat(1, 3)), tol, DeltaSource::NotUsed);
        assert!(!v.holds, "exact comparison ignores tolerance");
        let v = Verdict::compare(TheoremId::T1_3, Params::default(), Side::Approx(1.0 + 1e-10), Side::Exact(rat(1, 1)), tol, DeltaSource::NotUsed);
        assert!(v.holds && !v.exact);
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["theorem"], "t1.3");
        assert_eq!(json["deltaSource"], "none");
    }
}
