use serde::{Deserialize, Serialize};

use super::{require, Model, RarityEmbedding};
use crate::error::Result;
use crate::math::{cholesky, CholFactor, CovMatrix};
use crate::tilt::{MixtureParam, TiltParam};

/// Outperformance (best-of) call on `d` correlated lognormal assets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RainbowSpec {
    pub s0: Vec<f64>,
    pub sigma: Vec<f64>,
    pub corr: CovMatrix,
    pub r: f64,
    pub maturity: f64,
    pub strike: f64,
}

#[derive(Clone, Debug)]
pub struct Rainbow {
    spec: RainbowSpec,
    chol: CholFactor,
    /// σ_j √T
    vol: Vec<f64>,
    /// −σ_j² T / 2
    disc_drift: Vec<f64>,
    /// (r − σ_j²/2) T
    fwd_drift: Vec<f64>,
    discount: f64,
}

impl Rainbow {
    pub fn new(spec: RainbowSpec) -> Result<Self> {
        let d = spec.s0.len();
        require(d >= 1, "need at least one asset")?;
        require(spec.sigma.len() == d, "one volatility per asset")?;
        require(spec.corr.dim() == d, "correlation matrix must be d x d")?;
        require(
            spec.corr.has_unit_diagonal(),
            "correlation diagonal must be 1",
        )?;
        require(spec.maturity > 0.0, "maturity must be positive")?;
        require(
            spec.s0.iter().chain(&spec.sigma).all(|v| *v > 0.0),
            "prices and volatilities must be positive",
        )?;
        let chol = cholesky(&spec.corr)?;
        let t = spec.maturity;
        let vol = spec.sigma.iter().map(|s| s * t.sqrt()).collect();
        let disc_drift = spec.sigma.iter().map(|s| -0.5 * s * s * t).collect();
        let fwd_drift = spec
            .sigma
            .iter()
            .map(|s| (spec.r - 0.5 * s * s) * t)
            .collect();
        let discount = (-spec.r * t).exp();
        Ok(Self {
            spec,
            chol,
            vol,
            disc_drift,
            fwd_drift,
            discount,
        })
    }

    pub fn spec(&self) -> &RainbowSpec {
        &self.spec
    }

    pub fn chol(&self) -> &CholFactor {
        &self.chol
    }

    /// Terminal prices `S_T^{(j)}`.
    pub fn terminal_prices(&self, x: &[f64]) -> Vec<f64> {
        let mut cx = vec![0.0; x.len()];
        self.chol.apply(x, &mut cx);
        cx.iter()
            .enumerate()
            .map(|(j, c)| self.spec.s0[j] * (self.fwd_drift[j] + self.vol[j] * c).exp())
            .collect()
    }

    fn best_discounted(&self, x: &[f64], strikes: impl Fn(usize) -> f64) -> f64 {
        let mut cx = vec![0.0; x.len()];
        self.chol.apply(x, &mut cx);
        let mut best = f64::NEG_INFINITY;
        for (j, c) in cx.iter().enumerate() {
            let s = self.spec.s0[j] * (self.disc_drift[j] + self.vol[j] * c).exp();
            best = best.max(s - strikes(j));
        }
        best.max(0.0)
    }
}

impl Model for Rainbow {
    fn name(&self) -> &'static str {
        "rainbow"
    }

    fn dim(&self) -> usize {
        self.spec.s0.len()
    }

    fn payoff(&self, x: &[f64]) -> f64 {
        let k = self.discount * self.spec.strike;
        self.best_discounted(x, |_| k)
    }

    fn rarity(&self) -> Option<&dyn RarityEmbedding> {
        Some(self)
    }

    /// `α_j = C⁻¹ η_j` with `η_j` nonzero only in coordinate `j`, chosen so
    /// that asset `j` is expected to finish at the strike.
    fn approx_init(&self) -> Result<MixtureParam> {
        require(
            self.spec.strike > 0.0,
            "approximation needs a positive strike",
        )?;
        let d = self.dim();
        let t = self.spec.maturity;
        let tilts = (0..d)
            .map(|j| {
                let mut eta = vec![0.0; d];
                eta[j] = ((self.spec.strike / self.spec.s0[j]).ln() - self.spec.r * t)
                    / (self.spec.sigma[j] * t.sqrt());
                self.chol.solve(&eta).map(TiltParam::new)
            })
            .collect::<Result<Vec<_>>>()?;
        MixtureParam::uniform(tilts)
    }
}

impl RarityEmbedding for Rainbow {
    fn components(&self) -> usize {
        self.dim()
    }

    /// `Y^{(j)} / K`: asset `j`'s terminal price relative to the strike.
    fn rarity_statistic(&self, j: usize, x: &[f64]) -> f64 {
        let c = self.chol.apply_row(j, x);
        self.spec.s0[j] * (self.fwd_drift[j] + self.vol[j] * c).exp() / self.spec.strike
    }

    fn payoff_delta(&self, delta: &[f64], x: &[f64]) -> f64 {
        let k = self.discount * self.spec.strike;
        self.best_discounted(x, |j| k * delta[j])
    }
}
