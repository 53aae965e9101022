use serde::{Deserialize, Serialize};

use super::{require, Model};
use crate::error::Result;
use crate::math::{cholesky, CholFactor, CovMatrix};
use crate::tilt::{MixtureParam, TiltParam};

/// Largest basket for which all `2^d` sign regions get a component.
pub const MAX_PYRAMID_ASSETS: usize = 10;

fn default_true() -> bool {
    true
}

/// Pyramid rainbow call `(Σ_j |S_T^{(j)} − K_j| − K)⁺`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PyramidSpec {
    pub s0: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Per-asset strikes `K_j`.
    pub asset_strikes: Vec<f64>,
    pub corr: CovMatrix,
    pub r: f64,
    pub maturity: f64,
    pub strike: f64,
    /// Multiply the payoff by `e^{−rT}`.
    #[serde(default = "default_true")]
    pub discount: bool,
}

#[derive(Clone, Debug)]
pub struct PyramidCall {
    spec: PyramidSpec,
    chol: CholFactor,
    vol: Vec<f64>,
    fwd_drift: Vec<f64>,
    discount: f64,
}

impl PyramidCall {
    pub fn new(spec: PyramidSpec) -> Result<Self> {
        let d = spec.s0.len();
        require(d >= 1, "need at least one asset")?;
        require(
            d <= MAX_PYRAMID_ASSETS,
            "pyramid option supports at most 10 assets",
        )?;
        require(spec.sigma.len() == d, "one volatility per asset")?;
        require(spec.asset_strikes.len() == d, "one strike per asset")?;
        require(spec.corr.dim() == d, "correlation matrix must be d x d")?;
        require(
            spec.corr.has_unit_diagonal(),
            "correlation diagonal must be 1",
        )?;
        require(spec.maturity > 0.0, "maturity must be positive")?;
        require(
            spec.s0
                .iter()
                .chain(&spec.sigma)
                .chain(&spec.asset_strikes)
                .all(|v| *v > 0.0),
            "prices, volatilities and strikes must be positive",
        )?;
        let chol = cholesky(&spec.corr)?;
        let t = spec.maturity;
        let vol = spec.sigma.iter().map(|s| s * t.sqrt()).collect();
        let fwd_drift = spec
            .sigma
            .iter()
            .map(|s| (spec.r - 0.5 * s * s) * t)
            .collect();
        let discount = if spec.discount {
            (-spec.r * t).exp()
        } else {
            1.0
        };
        Ok(Self {
            spec,
            chol,
            vol,
            fwd_drift,
            discount,
        })
    }

    pub fn spec(&self) -> &PyramidSpec {
        &self.spec
    }

    pub fn components(&self) -> usize {
        1 << self.spec.s0.len()
    }

    /// Target means `x_j` for the sign region `pattern` (bit `j` set means
    /// `S_T^{(j)} ≥ K_j`).
    ///
    /// Each coordinate starts from the forward price clamped to the correct
    /// side of its strike (`max` for "+", `min` for "−"), and all coordinates
    /// are then pushed outward by the common amount needed for the summed
    /// distance to reach `K`.
    pub fn target_means(&self, pattern: usize) -> Vec<f64> {
        let d = self.spec.s0.len();
        let t = self.spec.maturity;
        let anchor: Vec<f64> = (0..d)
            .map(|j| {
                let fwd = self.spec.s0[j] * (self.spec.r * t).exp();
                let k = self.spec.asset_strikes[j];
                if pattern >> j & 1 == 1 {
                    fwd.max(k)
                } else {
                    fwd.min(k)
                }
            })
            .collect();
        let reached: f64 = anchor
            .iter()
            .zip(&self.spec.asset_strikes)
            .map(|(a, k)| (a - k).abs())
            .sum();
        let push = (self.spec.strike - reached).max(0.0) / d as f64;
        (0..d)
            .map(|j| {
                if pattern >> j & 1 == 1 {
                    anchor[j] + push
                } else {
                    // keep the log-mean finite when the push overshoots zero
                    (anchor[j] - push).max(0.01 * self.spec.s0[j])
                }
            })
            .collect()
    }
}

impl Model for PyramidCall {
    fn name(&self) -> &'static str {
        "pyramid"
    }

    fn dim(&self) -> usize {
        self.spec.s0.len()
    }

    fn payoff(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for j in 0..x.len() {
            let c = self.chol.apply_row(j, x);
            let s = self.spec.s0[j] * (self.fwd_drift[j] + self.vol[j] * c).exp();
            total += (s - self.spec.asset_strikes[j]).abs();
        }
        self.discount * (total - self.spec.strike).max(0.0)
    }

    /// One component per sign region, `α = C⁻¹η` with
    /// `η_j = (log(x_j / S_0^{(j)}) − rT) / (σ_j √T)`.
    fn approx_init(&self) -> Result<MixtureParam> {
        let t = self.spec.maturity;
        let tilts = (0..self.components())
            .map(|p| {
                let eta: Vec<f64> = self
                    .target_means(p)
                    .iter()
                    .enumerate()
                    .map(|(j, x)| {
                        ((x / self.spec.s0[j]).ln() - self.spec.r * t)
                            / (self.spec.sigma[j] * t.sqrt())
                    })
                    .collect();
                self.chol.solve(&eta).map(TiltParam::new)
            })
            .collect::<Result<Vec<_>>>()?;
        MixtureParam::uniform(tilts)
    }
}
