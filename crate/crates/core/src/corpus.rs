//! Seeded random weights for sweeps and property checks.

use rand::seq::index::sample;
use rand::Rng;

use crate::dyadic::DyadicWeight;
use crate::geom::Cube;
use crate::num::{int, rat, Rational};
use crate::weight::StepWeight;

/// Step weight on `(0, 1)` with `1..=max_pieces` pieces, breakpoints on the
/// grid `k/64` and integer values in `1..=max_value`.
pub fn random_step_weight<R: Rng>(rng: &mut R, max_pieces: usize, max_value: i64) -> StepWeight {
    let m = rng.gen_range(1..=max_pieces.clamp(1, 64));
    let mut cuts: Vec<usize> = sample(rng, 63, m - 1).into_iter().map(|k| k + 1).collect();
    cuts.sort_unstable();
    let mut bps = vec![int(0)];
    bps.extend(cuts.into_iter().map(|k| rat(k as i64, 64)));
    bps.push(int(1));
    let vals = (0..m).map(|_| int(rng.gen_range(1..=max_value))).collect();
    StepWeight::new(bps, vals).expect("valid by construction")
}

/// Cell values uniform in `1..=max_value` on the unit cube.
pub fn random_dyadic_weight<R: Rng>(rng: &mut R, n: usize, depth: u32, max_value: i64) -> DyadicWeight {
    let cells = (0..1usize << (n as u32 * depth)).map(|_| int(rng.gen_range(1..=max_value))).collect();
    DyadicWeight::new(Cube::unit(n), depth, cells).expect("valid by construction")
}

/// `1 + ε·s` with independent random signs `s = ±1`; needs `0 < ε < 1`.
pub fn flat_dyadic_weight<R: Rng>(rng: &mut R, n: usize, depth: u32, eps: &Rational) -> DyadicWeight {
    let one = int(1);
    let cells = (0..1usize << (n as u32 * depth)).map(|_| if rng.gen_bool(0.5) { &one + eps } else { &one - eps }).collect();
    DyadicWeight::new(Cube::unit(n), depth, cells).expect("positive for ε < 1")
}
