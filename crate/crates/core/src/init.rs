//! Starting mixtures for the CE iterations: random perturbation, the
//! rarity-parameter scheme and model-specific analytical approximations.

use serde::{Deserialize, Serialize};

use crate::ce::{mixture_update_raw, PilotEvaluation};
use crate::error::{Error, Result};
use crate::math::{order_statistic, Phase, RngStream, SampleBatch};
use crate::models::Model;
use crate::tilt::{floor_weights, sample_mixture, MixtureParam, TiltParam};

/// Default half-width of the perturbation box.
pub const DEFAULT_PERTURBATION_SCALE: f64 = 0.1;

/// Redraw budget when perturbed tilts coincide.
const MAX_PERTURBATION_DRAWS: u32 = 1000;

/// Equal weights and tilts `base + ε_j`, `ε_j` uniform on
/// `[−scale, scale]^d`, redrawn until all tilts are pairwise distinct.
pub fn init_perturbation(
    m: usize,
    base: &TiltParam,
    scale: f64,
    stream: RngStream,
) -> Result<MixtureParam> {
    if m == 0 || base.dim() == 0 {
        return Err(Error::InvalidParameter("need m >= 1 and d >= 1".into()));
    }
    if !(scale >= 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "invalid perturbation scale {scale}"
        )));
    }
    if m == 1 && scale == 0.0 {
        return Ok(MixtureParam::single(base.clone()));
    }
    if scale == 0.0 {
        return Err(Error::InvalidParameter(
            "distinct tilts need a positive perturbation scale".into(),
        ));
    }
    for attempt in 0..MAX_PERTURBATION_DRAWS {
        let mut cursor = stream.at_iteration(attempt).cursor(0);
        let tilts: Vec<TiltParam> = (0..m)
            .map(|_| {
                TiltParam::new(
                    base.alpha
                        .iter()
                        .map(|b| b + scale * (2.0 * cursor.uniform() - 1.0))
                        .collect(),
                )
            })
            .collect();
        let theta = MixtureParam::uniform(tilts)?;
        if theta.min_tilt_separation() > 0.0 {
            return Ok(theta);
        }
    }
    Err(Error::InvalidParameter(
        "could not draw distinct tilts".into(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RarityConfig {
    pub rho: f64,
    pub pilot_size: usize,
    pub max_stages: usize,
    /// When set, stage weights follow the CE update floored at this value
    /// instead of staying at `1/m`.
    pub adaptive_min_weight: Option<f64>,
}

impl Default for RarityConfig {
    fn default() -> Self {
        Self {
            rho: 0.05,
            pilot_size: 10_000,
            max_stages: 50,
            adaptive_min_weight: None,
        }
    }
}

impl RarityConfig {
    /// `N0 = ⌊Nρ/m⌋`, the number of samples each component keeps per stage.
    pub fn elite_count(&self, m: usize) -> Result<usize> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rho {} must lie in (0, 1)",
                self.rho
            )));
        }
        if self.max_stages < 1 {
            return Err(Error::InvalidParameter("max_stages must be >= 1".into()));
        }
        let n0 = (self.pilot_size as f64 * self.rho / m as f64).floor() as usize;
        if n0 < 1 {
            return Err(Error::InvalidParameter(format!(
                "N·rho/m = {}·{}/{m} leaves no samples per component",
                self.pilot_size, self.rho
            )));
        }
        Ok(n0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RarityStage {
    pub stage: u32,
    pub delta: Vec<f64>,
    /// Mixture produced by this stage.
    pub theta: MixtureParam,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RarityTrace {
    pub stages: Vec<RarityStage>,
    pub theta: MixtureParam,
}

/// Largest `δ` with at least `n0` statistics `≥ δ`, never below `prev`.
pub fn rarity_delta(stats: &[f64], n0: usize, prev: f64) -> Result<f64> {
    let n = stats.len();
    if n0 < 1 || n0 > n {
        return Err(Error::RankOutOfRange { rank: n0, len: n });
    }
    Ok(order_statistic(stats, n - n0 + 1)?.max(prev))
}

/// `δ₁ = X_(N−N0+1)/a ∨ prev₁`, `δ₂ = X_(N0)/b ∨ prev₂` for one-dimensional samples.
pub fn rarity_delta_two_sided(
    samples: &SampleBatch,
    a: f64,
    b: f64,
    n0: usize,
    prev: [f64; 2],
) -> Result<[f64; 2]> {
    crate::error::check_dim(1, samples.dim())?;
    let up: Vec<f64> = samples.rows().map(|x| x[0] / a).collect();
    let down: Vec<f64> = samples.rows().map(|x| x[0] / b).collect();
    Ok([
        rarity_delta(&up, n0, prev[0])?,
        rarity_delta(&down, n0, prev[1])?,
    ])
}

/// `δ_j = Y^{(j)}_(N−N0+1)/K ∨ prev_j`; `prices[j]` holds asset `j`'s
/// terminal prices.
pub fn rarity_delta_rainbow(
    prices: &[Vec<f64>],
    strike: f64,
    n0: usize,
    prev: &[f64],
) -> Result<Vec<f64>> {
    crate::error::check_dim(prices.len(), prev.len())?;
    prices
        .iter()
        .zip(prev)
        .map(|(p, d)| {
            let scaled: Vec<f64> = p.iter().map(|y| y / strike).collect();
            rarity_delta(&scaled, n0, *d)
        })
        .collect()
}

/// Rarity-parameter CE: raise `δ` stage by stage until the embedded problem
/// `V_δ` coincides with (or is rarer than) `V`. Stage `i` reads stream
/// `(seed, init, i)`.
pub fn init_rarity_ce(
    model: &dyn Model,
    cfg: &RarityConfig,
    theta_start: MixtureParam,
    seed: u64,
) -> Result<RarityTrace> {
    let emb = model
        .rarity()
        .ok_or_else(|| Error::EmbeddingUnavailable(model.name().into()))?;
    let m = emb.components();
    crate::error::check_dim(m, theta_start.components())?;
    crate::error::check_dim(model.dim(), theta_start.dim())?;
    let n0 = cfg.elite_count(m)?;
    if let Some(w) = cfg.adaptive_min_weight {
        floor_weights(&vec![1.0; m], w)?;
    }
    let mut delta = vec![f64::NEG_INFINITY; m];
    let mut theta = theta_start;
    let mut stages = Vec::new();
    for stage in 0..cfg.max_stages as u32 {
        let stream = RngStream::new(seed, Phase::Init).at_iteration(stage);
        let samples = sample_mixture(&theta, cfg.pilot_size, stream);
        let mut stats = vec![0.0; samples.len()];
        for (j, dj) in delta.iter_mut().enumerate() {
            for (s, x) in stats.iter_mut().zip(samples.rows()) {
                *s = emb.rarity_statistic(j, x);
            }
            *dj = rarity_delta(&stats, n0, *dj)?;
        }
        let eval = PilotEvaluation::evaluate(&theta, samples, |x| emb.payoff_delta(&delta, x))?;
        let raw = mixture_update_raw(&eval, &theta).map_err(|e| match e {
            Error::DegenerateUpdate { .. } => Error::DegenerateUpdate {
                iteration: stage as usize,
            },
            other => other,
        })?;
        theta = match cfg.adaptive_min_weight {
            Some(w) => raw.floored(w)?,
            None => MixtureParam::uniform(raw.tilts)?,
        };
        stages.push(RarityStage {
            stage,
            delta: delta.clone(),
            theta: theta.clone(),
        });
        if delta.iter().all(|d| *d >= 1.0) {
            return Ok(RarityTrace { stages, theta });
        }
    }
    Err(Error::StagnantRarity {
        stages: cfg.max_stages,
        last_delta: delta,
    })
}

/// The model's analytical starting mixture.
pub fn init_approx(model: &dyn Model) -> Result<MixtureParam> {
    model.approx_init()
}
