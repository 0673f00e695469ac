//! Positive step weights on a bounded interval.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::geom::Interval;
use crate::num::{as_small_int, format_rational, rpow, to_f64, Rational, Real};

/// `w = Σ v_k 1_{(x_{k-1}, x_k)}` with `x_0 < … < x_m` and `v_k > 0`.
/// Values at breakpoints are never read.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepWeight {
    breakpoints: Vec<Rational>,
    values: Vec<Rational>,
}

impl StepWeight {
    pub fn new(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parse("a step weight needs at least one piece".into()));
        }
        if breakpoints.len() != values.len() + 1 {
            return Err(Error::Parse(format!(
                "{} breakpoints given for {} values; expected {}",
                breakpoints.len(),
                values.len(),
                values.len() + 1
            )));
        }
        for (k, pair) in breakpoints.windows(2).enumerate() {
            if pair[0] >= pair[1] {
                return Err(Error::Parse(format!(
                    "breakpoints must be strictly increasing: breakpoint {} ({}) is not below breakpoint {} ({})",
                    k,
                    format_rational(&pair[0]),
                    k + 1,
                    format_rational(&pair[1])
                )));
            }
        }
        for (k, v) in values.iter().enumerate() {
            if !v.is_positive() {
                return Err(Error::Parse(format!(
                    "values must be positive: value {} is {}",
                    k,
                    format_rational(v)
                )));
            }
        }
        Ok(StepWeight { breakpoints, values })
    }

    pub fn constant(c: Rational, support: &Interval) -> Result<Self> {
        StepWeight::new(vec![support.lo.clone(), support.hi.clone()], vec![c])
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn num_pieces(&self) -> usize {
        self.values.len()
    }

    pub fn support(&self) -> Interval {
        Interval { lo: self.breakpoints[0].clone(), hi: self.breakpoints[self.values.len()].clone() }
    }

    /// `(lo, hi, value)` of every piece, left to right.
    pub fn pieces(&self) -> impl Iterator<Item = (&Rational, &Rational, &Rational)> {
        self.values.iter().enumerate().map(move |(k, v)| (&self.breakpoints[k], &self.breakpoints[k + 1], v))
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|v| v == &self.values[0])
    }

    pub fn min_value(&self) -> &Rational {
        self.values.iter().min().expect("nonempty")
    }

    pub fn max_value(&self) -> &Rational {
        self.values.iter().max().expect("nonempty")
    }

    /// Index of the piece whose open interval contains `x`, or of the piece to
    /// the right when `x` is an interior breakpoint.
    pub fn piece_index(&self, x: &Rational) -> Option<usize> {
        let m = self.values.len();
        if x < &self.breakpoints[0] || x >= &self.breakpoints[m] {
            return None;
        }
        Some(self.breakpoints.partition_point(|b| b <= x) - 1)
    }

    /// `w(x)` for `x` off the breakpoints.
    pub fn value_at(&self, x: &Rational) -> Option<&Rational> {
        self.piece_index(x).map(|k| &self.values[k])
    }

    /// `∫_{x_0}^{x} w`, with `x` clamped to the support.
    pub fn cumulative(&self, x: &Rational) -> Rational {
        let m = self.values.len();
        if x <= &self.breakpoints[0] {
            return Rational::zero();
        }
        let mut acc = Rational::zero();
        for k in 0..m {
            let (a, b) = (&self.breakpoints[k], &self.breakpoints[k + 1]);
            if x <= a {
                break;
            }
            let end = if x < b { x } else { b };
            acc += &self.values[k] * (end - a);
        }
        acc
    }

    pub fn total_mass(&self) -> Rational {
        self.pieces().map(|(a, b, v)| v * (b - a)).sum()
    }

    fn check_inside(&self, j: &Interval) -> Result<()> {
        if !self.support().contains_interval(j) {
            return Err(Error::Domain(format!("interval {} is not inside the support {}", j, self.support())));
        }
        Ok(())
    }

    /// `w(J) = ∫_J w`.
    pub fn mass(&self, j: &Interval) -> Result<Rational> {
        self.check_inside(j)?;
        Ok(self.cumulative(&j.hi) - self.cumulative(&j.lo))
    }

    /// `w(J)/|J|`.
    pub fn average(&self, j: &Interval) -> Result<Rational> {
        Ok(self.mass(j)? / j.length())
    }

    /// `∫_J w^r`; exact when `r` is an integer.
    pub fn power_integral(&self, j: &Interval, r: f64) -> Result<Real> {
        self.check_inside(j)?;
        let parts = self.clip_pieces(j);
        if let Some(e) = as_small_int(r) {
            let s: Rational = parts.iter().map(|(len, v)| rpow(v, e) * len).sum();
            return Ok(Real::from_rational(&s));
        }
        let s: f64 = parts.iter().map(|(len, v)| to_f64(v).powf(r) * to_f64(len)).sum();
        Ok(Real::approx(s))
    }

    /// `(1/|J|) ∫_J w^r`; exact when `r` is an integer.
    pub fn power_average(&self, j: &Interval, r: f64) -> Result<Real> {
        self.check_inside(j)?;
        let parts = self.clip_pieces(j);
        if let Some(e) = as_small_int(r) {
            let s: Rational = parts.iter().map(|(len, v)| rpow(v, e) * len).sum();
            return Ok(Real::from_rational(&(s / j.length())));
        }
        let s: f64 = parts.iter().map(|(len, v)| to_f64(v).powf(r) * to_f64(len)).sum();
        Ok(Real::approx(s / to_f64(&j.length())))
    }

    /// `(length, value)` of every piece intersected with `J`.
    fn clip_pieces(&self, j: &Interval) -> Vec<(Rational, Rational)> {
        self.pieces()
            .filter_map(|(a, b, v)| {
                let lo = if a > &j.lo { a } else { &j.lo };
                let hi = if b < &j.hi { b } else { &j.hi };
                (lo < hi).then(|| (hi - lo, v.clone()))
            })
            .collect()
    }

    /// `w` on `J`, with support exactly `J`.
    pub fn restrict(&self, j: &Interval) -> Result<StepWeight> {
        self.check_inside(j)?;
        let mut bps = vec![j.lo.clone()];
        let mut vals = Vec::new();
        for (a, b, v) in self.pieces() {
            if b <= &j.lo || a >= &j.hi {
                continue;
            }
            let hi = if b < &j.hi { b.clone() } else { j.hi.clone() };
            bps.push(hi);
            vals.push(v.clone());
        }
        StepWeight::new(bps, vals)
    }

    /// `c·w`.
    pub fn scale(&self, c: &Rational) -> Result<StepWeight> {
        StepWeight::new(self.breakpoints.clone(), self.values.iter().map(|v| v * c).collect())
    }

    /// `w ∘ φ^{-1}` for `φ(x) = s·x + t`, `s > 0`.
    pub fn affine(&self, s: &Rational, t: &Rational) -> Result<StepWeight> {
        if !s.is_positive() {
            return Err(Error::Domain("affine scale must be positive".into()));
        }
        StepWeight::new(self.breakpoints.iter().map(|x| s * x + t).collect(), self.values.clone())
    }

    /// Same function with adjacent equal pieces merged.
    pub fn merged(&self) -> StepWeight {
        let mut bps = vec![self.breakpoints[0].clone()];
        let mut vals: Vec<Rational> = Vec::new();
        for (_, b, v) in self.pieces() {
            if vals.last() == Some(v) {
                *bps.last_mut().expect("nonempty") = b.clone();
            } else {
                vals.push(v.clone());
                bps.push(b.clone());
            }
        }
        StepWeight { breakpoints: bps, values: vals }
    }

    pub fn to_f64_parts(&self) -> (Vec<f64>, Vec<f64>) {
        (self.breakpoints.iter().map(to_f64).collect(), self.values.iter().map(to_f64).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};

    fn two_step() -> StepWeight {
        StepWeight::new(vec![int(0), rat(1, 2), int(1)], vec![int(1), int(3)]).unwrap()
    }

    fn iv(a: Rational, b: Rational) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn averages() {
        let w = two_step();
        assert_eq!(w.average(&iv(int(0), int(1))).unwrap(), int(2));
        assert_eq!(w.average(&iv(rat(1, 4), rat(3, 4))).unwrap(), int(2));
        let c = StepWeight::constant(rat(7, 3), &iv(int(-1), int(5))).unwrap();
        assert_eq!(c.average(&iv(int(0), rat(1, 3))).unwrap(), rat(7, 3));
        assert!(w.average(&iv(int(0), int(2))).is_err());
    }

    #[test]
    fn power_averages() {
        let w = two_step();
        let i = iv(int(0), int(1));
        let r2 = w.power_average(&i, 2.0).unwrap();
        assert_eq!(r2, Real { value: 5.0, exact: true });
        let rm1 = w.power_average(&i, -1.0).unwrap();
        assert!(rm1.exact);
        assert!((rm1.value - 2.0 / 3.0).abs() < 1e-15);
        let r1 = w.power_average(&i, 1.0).unwrap();
        assert!(r1.exact && r1.value == 2.0);
        let half = w.power_average(&i, 1.5).unwrap();
        assert!(!half.exact);
    }

    #[test]
    fn restriction() {
        let w = two_step();
        let r = w.restrict(&iv(rat(1, 4), rat(3, 4))).unwrap();
        assert_eq!(r.breakpoints(), &[rat(1, 4), rat(1, 2), rat(3, 4)]);
        assert_eq!(r.values(), &[int(1), int(3)]);
        assert_eq!(w.restrict(&w.support()).unwrap(), w);
        let inner = w.restrict(&iv(rat(1, 8), rat(1, 4))).unwrap();
        assert_eq!(inner.values(), &[int(1)]);
    }

    #[test]
    fn validation_messages() {
        let e = StepWeight::new(vec![int(0), int(0)], vec![int(1)]).unwrap_err();
        assert!(e.to_string().contains("strictly increasing"));
        let e = StepWeight::new(vec![int(0), int(1)], vec![int(0)]).unwrap_err();
        assert!(e.to_string().contains("positive"));
        assert!(StepWeight::new(vec![int(0)], vec![]).is_err());
    }

    #[test]
    fn merge_and_lookup() {
        let w = StepWeight::new(vec![int(0), int(1), int(2), int(3)], vec![int(2), int(2), int(1)]).unwrap();
        let m = w.merged();
        assert_eq!(m.num_pieces(), 2);
        assert_eq!(m.value_at(&rat(3, 2)), Some(&int(2)));
        assert_eq!(w.piece_index(&int(1)), Some(1));
        assert_eq!(w.piece_index(&int(3)), None);
        assert_eq!(w.cumulative(&int(10)), int(5));
    }
}
