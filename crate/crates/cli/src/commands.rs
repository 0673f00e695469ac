use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use rhi_core::constants::{
    a1_constant, a1_plus_constant, ap_constant, fujii_wilson_constant, fujii_wilson_plus_constant, gurov_reshetnyak, khrushchev_constant,
    RefinementGrid,
};
use rhi_core::corpus::{random_dyadic_weight, random_step_weight};
use rhi_core::dyadic::{dyadic_fujii_wilson, verify_dyadic_rhi, verify_superlevel_lemma, DyadicWeight};
use rhi_core::extremal::{sharpness_search, SearchConfig, Variant};
use rhi_core::io::{parse_measure, parse_weight, step_to_json, WeightFile};
use rhi_core::maximal1d::{maximal_profile, Op};
use rhi_core::mugrid::{build_mu_grid, verify_mu_rhi, MuCellWeight};
use rhi_core::num::{parse_rational, to_f64};
use rhi_core::report::{TheoremId, Verdict};
use rhi_core::rhi::{admissible_range, verify, VerifyParams};
use rhi_core::{Interval, Rational, StepWeight, Tolerance};

use crate::args::{ConstantsArgs, GridArgs, Kind, ProfileArgs, SharpnessArgs, SweepArgs, VerifyArgs};
use crate::output::{read_input, sha256_hex, Body, Outcome};

const DYADIC_IDS: [TheoremId; 5] = [TheoremId::T4_2, TheoremId::T1_1, TheoremId::Cor4_3, TheoremId::Cor3_5, TheoremId::LSuperlevel];

fn rationals(text: &str, count: usize, flag: &str) -> anyhow::Result<Vec<Rational>> {
    let xs: Vec<Rational> = text.split(',').map(|s| parse_rational(s.trim())).collect::<Result<_, _>>().with_context(|| format!("--{flag}"))?;
    if xs.len() != count {
        bail!("--{flag} expects {count} comma-separated rationals, got {}", xs.len());
    }
    Ok(xs)
}

fn interval(text: &str) -> anyhow::Result<Interval> {
    let mut xs = rationals(text, 2, "interval")?;
    let hi = xs.pop().expect("two values");
    let lo = xs.pop().expect("two values");
    Ok(Interval::new(lo, hi)?)
}

fn theorem(text: &str) -> anyhow::Result<TheoremId> {
    Ok(text.parse::<TheoremId>()?)
}

fn to_value<T: serde::Serialize>(x: &T) -> anyhow::Result<Value> {
    Ok(serde_json::to_value(x)?)
}

fn tolerance(t: f64) -> anyhow::Result<Tolerance> {
    if !(t > 0.0 && t.is_finite()) {
        bail!("--tol must be a positive number, got {t}");
    }
    Ok(Tolerance::new(t))
}

fn step_only(file: WeightFile, what: &str) -> anyhow::Result<StepWeight> {
    match file {
        WeightFile::Step(w) => Ok(w),
        WeightFile::Dyadic(_) => bail!("{what} needs a step weight, got a dyadic weight"),
    }
}

pub fn run_constants(a: &ConstantsArgs) -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let mut inputs = Vec::new();
    let file = parse_weight(&read_input(&a.weight, &mut inputs)?)?;
    let report = match (file, a.kind) {
        (WeightFile::Dyadic(d), Kind::Fw) => dyadic_fujii_wilson(&d),
        (WeightFile::Dyadic(_), k) => bail!("constant {k:?} is only available for step weights; dyadic weights support --kind fw"),
        (WeightFile::Step(w), kind) => {
            let grid = RefinementGrid::for_weight(&w, a.depth);
            match kind {
                Kind::Fw => fujii_wilson_constant(&w, &grid),
                Kind::Fwplus => fujii_wilson_plus_constant(&w, &grid),
                Kind::A1 => a1_constant(&w),
                Kind::A1plus => a1_plus_constant(&w),
                Kind::Ap => ap_constant(&w, a.p.ok_or_else(|| anyhow!("--kind ap needs --p"))?, &grid)?,
                Kind::Khrushchev => khrushchev_constant(&w, &grid),
                Kind::Gr => gurov_reshetnyak(&w, &grid),
            }
        }
    };
    Ok(Outcome { inputs, depth: Some(a.depth), elapsed: start.elapsed(), ..Outcome::json("constants", to_value(&report)?) })
}

fn verify_dyadic(id: TheoremId, d: &DyadicWeight, r: Option<f64>, tol: Tolerance) -> anyhow::Result<Verdict> {
    if id == TheoremId::LSuperlevel {
        return Ok(verify_superlevel_lemma(d));
    }
    let r = r.ok_or_else(|| anyhow!("--r is required for {id}"))?;
    Ok(verify_dyadic_rhi(d, r, id, tol)?)
}

pub fn run_verify(a: &VerifyArgs) -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let id = theorem(&a.theorem)?;
    let tol = tolerance(a.tol)?;
    let mut inputs = Vec::new();
    let file = parse_weight(&read_input(&a.weight, &mut inputs)?)?;
    let verdict = match file {
        WeightFile::Dyadic(d) => {
            if !DYADIC_IDS.contains(&id) {
                bail!("{id} is stated for step weights; dyadic weights support {}", DYADIC_IDS.map(|t| t.as_str()).join(", "));
            }
            match &a.measure {
                Some(path) if matches!(id, TheoremId::Cor4_3 | TheoremId::Cor3_5) => {
                    let axes = parse_measure(&read_input(path, &mut inputs)?)?;
                    let grid = build_mu_grid(axes, None, d.depth())?;
                    let w = MuCellWeight::new(&grid, d.cells().to_vec())?;
                    let r = a.r.ok_or_else(|| anyhow!("--r is required for {id}"))?;
                    verify_mu_rhi(&grid, &w, r, id, tol)?
                }
                Some(_) => bail!("--measure applies only to cor4.3 and cor3.5"),
                None => verify_dyadic(id, &d, a.r, tol)?,
            }
        }
        WeightFile::Step(w) => {
            if DYADIC_IDS.contains(&id) {
                bail!("{id} is stated for dyadic weights; pass a dyadic weight file");
            }
            let triple = match &a.triple {
                Some(t) => {
                    let xs = rationals(t, 3, "triple")?;
                    Some((xs[0].clone(), xs[1].clone(), xs[2].clone()))
                }
                None => None,
            };
            let p = VerifyParams {
                r: a.r,
                interval: a.interval.as_deref().map(interval).transpose()?,
                triple,
                depth: a.depth,
                max_depth: a.max_depth.max(a.depth),
                tol,
                delta: a.delta,
                lambda0: a.lambda0.as_deref().map(parse_rational).transpose()?,
                ..Default::default()
            };
            verify(id, &w, &p)?
        }
    };
    Ok(Outcome {
        holds: verdict.holds,
        inputs,
        tolerance: Some(a.tol),
        depth: Some(a.depth),
        elapsed: start.elapsed(),
        ..Outcome::json("verify", to_value(&verdict)?)
    })
}

/// Midpoint of `[1, bound)`, or 2 when every exponent is admissible.
fn midpoint_exponent(delta: f64, id: TheoremId, n: usize) -> anyhow::Result<f64> {
    let bound = admissible_range(delta, id, n)?;
    Ok(if bound.is_infinite() { 2.0 } else { 0.5 * (1.0 + bound) })
}

pub fn run_sweep(a: &SweepArgs) -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let id = theorem(&a.theorem)?;
    let tol = tolerance(a.tol)?;
    if a.count == 0 {
        bail!("--count must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let results: Vec<Result<Verdict, String>> = if DYADIC_IDS.contains(&id) {
        if !(1..=3).contains(&a.n) || a.depth > 8 {
            bail!("the dyadic corpus needs 1 ≤ n ≤ 3 and depth ≤ 8");
        }
        let corpus: Vec<DyadicWeight> = (0..a.count).map(|_| random_dyadic_weight(&mut rng, a.n, a.depth, a.max_value)).collect();
        corpus
            .par_iter()
            .map(|d| {
                let r = match a.r {
                    Some(r) => r,
                    None => midpoint_exponent(to_f64(&dyadic_fujii_wilson(d).exact_value.expect("dyadic FW is exact")), id, a.n).map_err(|e| e.to_string())?,
                };
                verify_dyadic(id, d, Some(r), tol).map_err(|e| e.to_string())
            })
            .collect()
    } else {
        let corpus: Vec<StepWeight> = (0..a.count).map(|_| random_step_weight(&mut rng, a.pieces, a.max_value)).collect();
        corpus
            .par_iter()
            .map(|w| {
                let r = match a.r {
                    Some(r) => r,
                    // [w]_{A1} dominates the other δ's, so its range is admissible for all of them
                    None => midpoint_exponent(to_f64(&a1_constant(w).exact_value.expect("A1 is exact")), id, 1).map_err(|e| e.to_string())?,
                };
                let p = VerifyParams { r: Some(r), depth: a.depth, tol, ..Default::default() };
                verify(id, w, &p).map_err(|e| e.to_string())
            })
            .collect()
    };
    let holding = results.iter().filter(|v| matches!(v, Ok(v) if v.holds)).count();
    let errors = results.iter().filter(|v| v.is_err()).count();
    let failing = results.len() - holding - errors;
    let worst = results.iter().filter_map(|v| v.as_ref().ok()).map(|v| v.ratio.value).fold(f64::NEG_INFINITY, f64::max);
    let verdicts: Vec<Value> =
        results.iter().map(|v| v.as_ref().map_or_else(|e| json!({ "error": e }), |v| to_value(v).unwrap_or(Value::Null))).collect();
    let body = json!({
        "theorem": id,
        "corpus": "random",
        "n": a.n,
        "depth": a.depth,
        "count": a.count,
        "seed": a.seed,
        "holding": holding,
        "failing": failing,
        "errors": errors,
        "worstRatio": worst,
        "verdicts": verdicts,
    });
    Ok(Outcome {
        holds: failing == 0 && errors == 0,
        tolerance: Some(a.tol),
        depth: Some(a.depth),
        seed: Some(a.seed),
        elapsed: start.elapsed(),
        ..Outcome::json("sweep", body)
    })
}

pub fn run_sharpness(a: &SharpnessArgs) -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let variant: Variant = a.variant.parse()?;
    let cfg = SearchConfig {
        pieces: a.pieces,
        budget: a.budget,
        seed: a.seed,
        restarts: a.restarts,
        tol: tolerance(a.tol)?,
        ..SearchConfig::new(variant, a.delta, a.r)
    };
    let res = sharpness_search(&cfg)?;
    let witness: Value = serde_json::from_str(&step_to_json(&res.witness))?;
    let body = json!({
        "variant": res.variant,
        "delta": res.delta,
        "r": a.r,
        "bestRatio": res.best_ratio,
        "witnessConstant": res.witness_constant,
        "witnessWeight": witness,
        "restart": res.restart,
        "iterations": res.iterations,
        "traceHash": res.trace_hash,
    });
    Ok(Outcome {
        // a ratio above one would be a counterexample to the sharp bound
        holds: res.best_ratio <= 1.0 + a.tol,
        tolerance: Some(a.tol),
        seed: Some(a.seed),
        elapsed: start.elapsed(),
        ..Outcome::json("sharpness", body)
    })
}

pub fn run_grid(a: &GridArgs) -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let mut inputs = Vec::new();
    let axes = parse_measure(&read_input(&a.measure, &mut inputs)?)?;
    let grid = build_mu_grid(axes, None, a.depth)?;
    let dump = grid.dump(a.limit)?;
    Ok(Outcome { inputs, depth: Some(a.depth), elapsed: start.elapsed(), ..Outcome::json("grid", to_value(&dump)?) })
}

pub fn run_profile(a: &ProfileArgs) -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let op: Op = a.op.parse()?;
    let mut inputs = Vec::new();
    let text = read_input(&a.weight, &mut inputs)?;
    let w = step_only(parse_weight(&text)?, "profile")?;
    let i = match &a.interval {
        Some(t) => interval(t)?,
        None => w.support(),
    };
    let p = maximal_profile(&w, &i, op)?;
    let mut csv = format!("# op={}\n# weight_sha256={}\n# interval={}\nx,value\n", op.tag(), sha256_hex(text.as_bytes()), i);
    let k = a.samples as i64;
    for s in &p.segments {
        let len = &s.hi - &s.lo;
        for j in 0..=k {
            let x = &s.lo + &len * Rational::new(j.into(), (k + 1).into());
            csv += &format!("{},{}\n", to_f64(&x), to_f64(&s.eval(&x)));
        }
    }
    if let Some(last) = p.segments.last() {
        csv += &format!("{},{}\n", to_f64(&last.hi), to_f64(&last.eval(&last.hi)));
    }
    Ok(Outcome {
        command: "profile",
        body: Body::Csv(csv),
        holds: true,
        inputs,
        tolerance: None,
        depth: None,
        seed: None,
        elapsed: start.elapsed(),
    })
}
