use serde::{Deserialize, Serialize};

use super::{require, Model};
use crate::error::{Error, Result};
use crate::math::{bisect_root, BISECT_TOL};
use crate::tilt::{MixtureParam, TiltParam};

/// Discretely monitored arithmetic-average call under Black–Scholes dynamics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsianSpec {
    pub s0: f64,
    pub r: f64,
    pub sigma: f64,
    pub maturity: f64,
    /// Monitoring dates `0 < t_1 < … < t_d = T`.
    pub times: Vec<f64>,
    pub strike: f64,
}

impl AsianSpec {
    /// Monitoring dates `t_i = iT/d`.
    pub fn uniform(s0: f64, r: f64, sigma: f64, maturity: f64, d: usize, strike: f64) -> Self {
        let times = (1..=d).map(|i| i as f64 * maturity / d as f64).collect();
        Self {
            s0,
            r,
            sigma,
            maturity,
            times,
            strike,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AsianCall {
    spec: AsianSpec,
    /// log S_0 + (r − σ²/2) t_i
    log_drift: Vec<f64>,
    /// σ √(t_i − t_{i−1})
    step_vol: Vec<f64>,
    discount: f64,
}

impl AsianCall {
    pub fn new(spec: AsianSpec) -> Result<Self> {
        require(spec.s0 > 0.0, "S0 must be positive")?;
        require(spec.sigma > 0.0, "sigma must be positive")?;
        require(spec.maturity > 0.0, "maturity must be positive")?;
        require(!spec.times.is_empty(), "need at least one monitoring date")?;
        let mut prev = 0.0;
        for &t in &spec.times {
            require(t > prev, "monitoring dates must increase from 0")?;
            prev = t;
        }
        require(
            (prev - spec.maturity).abs() <= 1e-12 * spec.maturity,
            "last monitoring date must equal maturity",
        )?;
        let mut prev = 0.0;
        let mut step_vol = Vec::with_capacity(spec.times.len());
        let mut log_drift = Vec::with_capacity(spec.times.len());
        for &t in &spec.times {
            step_vol.push(spec.sigma * (t - prev).sqrt());
            log_drift.push(spec.s0.ln() + (spec.r - 0.5 * spec.sigma * spec.sigma) * t);
            prev = t;
        }
        let discount = (-spec.r * spec.maturity).exp();
        Ok(Self {
            spec,
            log_drift,
            step_vol,
            discount,
        })
    }

    pub fn spec(&self) -> &AsianSpec {
        &self.spec
    }

    /// Arithmetic average of the monitored prices.
    pub fn average_price(&self, x: &[f64]) -> f64 {
        let mut w = 0.0;
        let mut total = 0.0;
        for ((z, drift), vol) in x.iter().zip(&self.log_drift).zip(&self.step_vol) {
            w += vol * z;
            total += (drift + w).exp();
        }
        total / x.len() as f64
    }

    /// `E[S̄]` when every innovation has mean `a`.
    pub fn mean_average_price(&self, a: f64) -> f64 {
        self.average_price(&vec![a; self.dim()])
    }

    /// Common shift `a` solving `mean_average_price(a) = K`.
    pub fn approx_shift(&self) -> Result<f64> {
        let k = self.spec.strike;
        require(k > 0.0, "approximation needs a positive strike")?;
        let g = |a: f64| self.mean_average_price(a) - k;
        let (mut lo, mut hi) = (-1.0, 1.0);
        for _ in 0..60 {
            if g(lo) <= 0.0 && g(hi) >= 0.0 {
                break;
            }
            if g(lo) > 0.0 {
                lo *= 2.0;
            }
            if g(hi) < 0.0 {
                hi *= 2.0;
            }
        }
        bisect_root(g, lo, hi, BISECT_TOL).map_err(|e| match e {
            Error::NoBracket { .. } => Error::ApproxUnavailable("asian_call".into()),
            other => other,
        })
    }
}

impl Model for AsianCall {
    fn name(&self) -> &'static str {
        "asian_call"
    }

    fn dim(&self) -> usize {
        self.spec.times.len()
    }

    fn payoff(&self, x: &[f64]) -> f64 {
        self.discount * (self.average_price(x) - self.spec.strike).max(0.0)
    }

    fn approx_init(&self) -> Result<MixtureParam> {
        let a = self.approx_shift()?;
        Ok(MixtureParam::single(TiltParam::new(vec![a; self.dim()])))
    }
}
