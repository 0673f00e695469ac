//! JSON files for weights and measures. Rationals are strings `"p/q"` or
//! integer strings (plain JSON integers are also read). Writing produces a
//! canonical form: compact, fixed key order, lowest terms.

use serde::Deserialize;

use crate::dyadic::DyadicWeight;
use crate::error::{Error, Result};
use crate::geom::Cube;
use crate::mugrid::AtomlessMeasure1D;
use crate::num::{format_rational, parse_rational, Rational};
use crate::weight::StepWeight;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightFile {
    Step(StepWeight),
    Dyadic(DyadicWeight),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Num {
    Text(String),
    Int(i64),
}

impl Num {
    fn value(&self, what: &str) -> Result<Rational> {
        match self {
            Num::Text(s) => parse_rational(s).map_err(|e| Error::Parse(format!("{what}: {e}"))),
            Num::Int(i) => Ok(Rational::from_integer((*i).into())),
        }
    }
}

fn nums(xs: &[Num], what: &str) -> Result<Vec<Rational>> {
    xs.iter().enumerate().map(|(k, x)| x.value(&format!("{what}[{k}]"))).collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCube {
    lo: Vec<Num>,
    side: Num,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawWeight {
    Step { breakpoints: Vec<Num>, values: Vec<Num> },
    Dyadic { dim: usize, depth: u32, cube: Option<RawCube>, cells: Vec<Num> },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawMeasure {
    Cdf { knots: Vec<(Num, Num)> },
    Lebesgue { lo: Num, hi: Num },
    Product { axes: Vec<RawMeasure> },
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse(format!("invalid JSON: {e}"))
}

pub fn parse_weight(text: &str) -> Result<WeightFile> {
    match serde_json::from_str::<RawWeight>(text).map_err(json_error)? {
        RawWeight::Step { breakpoints, values } => Ok(WeightFile::Step(StepWeight::new(nums(&breakpoints, "breakpoints")?, nums(&values, "values")?)?)),
        RawWeight::Dyadic { dim, depth, cube, cells } => {
            if dim == 0 {
                return Err(Error::Parse("dim must be at least 1".into()));
            }
            let cube = match cube {
                None => Cube::unit(dim),
                Some(c) => {
                    let lo = nums(&c.lo, "cube.lo")?;
                    if lo.len() != dim {
                        return Err(Error::Parse(format!("cube.lo has {} coordinates but dim is {dim}", lo.len())));
                    }
                    Cube::new(lo, c.side.value("cube.side")?)?
                }
            };
            Ok(WeightFile::Dyadic(DyadicWeight::new(cube, depth, nums(&cells, "cells")?)?))
        }
    }
}

fn strings(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(format_rational).collect()
}

fn list(xs: &[Rational]) -> String {
    serde_json::to_string(&strings(xs)).expect("strings serialize")
}

pub fn weight_to_json(w: &WeightFile) -> String {
    match w {
        WeightFile::Step(s) => format!(r#"{{"kind":"step","breakpoints":{},"values":{}}}"#, list(s.breakpoints()), list(s.values())),
        WeightFile::Dyadic(d) => format!(
            r#"{{"kind":"dyadic","dim":{},"depth":{},"cube":{{"lo":{},"side":"{}"}},"cells":{}}}"#,
            d.dim(),
            d.depth(),
            list(&d.cube().lo),
            format_rational(&d.cube().side),
            list(d.cells())
        ),
    }
}

pub fn step_to_json(w: &StepWeight) -> String {
    weight_to_json(&WeightFile::Step(w.clone()))
}

pub fn dyadic_to_json(w: &DyadicWeight) -> String {
    weight_to_json(&WeightFile::Dyadic(w.clone()))
}

fn measure(raw: RawMeasure) -> Result<Vec<AtomlessMeasure1D>> {
    match raw {
        RawMeasure::Cdf { knots } => {
            let knots = knots
                .iter()
                .enumerate()
                .map(|(k, (x, f))| Ok((x.value(&format!("knots[{k}].x"))?, f.value(&format!("knots[{k}].F"))?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(vec![AtomlessMeasure1D::new(knots)?])
        }
        RawMeasure::Lebesgue { lo, hi } => {
            let i = crate::geom::Interval::new(lo.value("lo")?, hi.value("hi")?)?;
            Ok(vec![AtomlessMeasure1D::lebesgue(&i)])
        }
        RawMeasure::Product { axes } => {
            if axes.is_empty() {
                return Err(Error::Parse("a product measure needs at least one axis".into()));
            }
            let mut out = Vec::new();
            for a in axes {
                if matches!(a, RawMeasure::Product { .. }) {
                    return Err(Error::Parse("product axes must be one-dimensional".into()));
                }
                out.extend(measure(a)?);
            }
            Ok(out)
        }
    }
}

/// One measure per axis.
pub fn parse_measure(text: &str) -> Result<Vec<AtomlessMeasure1D>> {
    measure(serde_json::from_str::<RawMeasure>(text).map_err(json_error)?)
}

pub fn measure_to_json(axes: &[AtomlessMeasure1D]) -> String {
    let one = |m: &AtomlessMeasure1D| {
        let knots: Vec<[String; 2]> = m.knots().map(|(x, f)| [format_rational(x), format_rational(f)]).collect();
        format!(r#"{{"kind":"cdf","knots":{}}}"#, serde_json::to_string(&knots).expect("strings serialize"))
    };
    match axes {
        [m] => one(m),
        _ => format!(r#"{{"kind":"product","axes":[{}]}}"#, axes.iter().map(one).collect::<Vec<_>>().join(",")),
    }
}
