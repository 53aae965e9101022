use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};

/// Default bracket width for [`bisect_root`].
pub const BISECT_TOL: f64 = 1e-10;

/// Standard normal distribution function Φ(z).
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// The `rank`-th smallest value (1-based); ties count with multiplicity.
pub fn order_statistic(values: &[f64], rank: usize) -> Result<f64> {
    if rank == 0 || rank > values.len() {
        return Err(Error::RankOutOfRange {
            rank,
            len: values.len(),
        });
    }
    let mut scratch = values.to_vec();
    let (_, kth, _) = scratch.select_nth_unstable_by(rank - 1, f64::total_cmp);
    Ok(*kth)
}

/// Bisection on a bracketing interval. Returns the midpoint of the final
/// bracket, whose width is at most `tol`.
pub fn bisect_root<G>(g: G, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut g_lo = g(lo);
    let g_hi = g(hi);
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if !(g_lo.signum() * g_hi.signum() < 0.0) {
        return Err(Error::NoBracket { lo, hi });
    }
    // 200 halvings exhaust f64 resolution for any finite bracket.
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}
