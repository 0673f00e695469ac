//! Adaptive Gauss–Legendre quadrature (order 16, interval bisection).

use std::sync::LazyLock;

const ORDER: usize = 16;
const MAX_DEPTH: u32 = 48;

/// Nodes and weights on `[-1, 1]` from Newton iteration on `P_16`.
static RULE: LazyLock<[(f64, f64); ORDER]> = LazyLock::new(|| {
    let n = ORDER;
    let mut rule = [(0.0, 0.0); ORDER];
    for (i, slot) in rule.iter_mut().enumerate() {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
    }
    rule
});

fn gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    RULE.iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

/// `∫_a^b f` to within `abs_tol` (best effort past the depth limit).
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let whole = gauss(f, a, b);
    refine(f, a, b, whole, abs_tol.max(f64::MIN_POSITIVE), 0)
}

fn refine(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (l, r) = (gauss(f, a, m), gauss(f, m, b));
    let split = l + r;
    if (split - whole).abs() <= tol || depth >= MAX_DEPTH || m <= a || m >= b {
        return split;
    }
    refine(f, a, m, l, 0.5 * tol, depth + 1) + refine(f, m, b, r, 0.5 * tol, depth + 1)
}
