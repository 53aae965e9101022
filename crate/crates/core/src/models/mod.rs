//! Payoffs `V(x)` on standard-normal input spaces.
//!
//! Every model maps an innovation vector `x ∈ ℝ^d` (distributed `N(0, I_d)`
//! under the original measure) to a nonnegative payoff. Models that can be
//! grown from an easy target to the real one expose a [`RarityEmbedding`];
//! models with an analytical starting mixture implement
//! [`Model::approx_init`].

mod asian;
mod cev;
mod pyramid;
mod rainbow;
mod two_sided;

pub use asian::{AsianCall, AsianSpec};
pub use cev::{CevDigital, CevSpec};
pub use pyramid::{PyramidCall, PyramidSpec, MAX_PYRAMID_ASSETS};
pub use rainbow::{Rainbow, RainbowSpec};
pub use two_sided::{TwoSidedTail, TwoSidedTailSpec};

use crate::error::{check_dim, Error, Result};
use crate::tilt::MixtureParam;

pub trait Model: Send + Sync {
    fn name(&self) -> &'static str;

    /// Dimension of the innovation vector.
    fn dim(&self) -> usize;

    /// `V(x)`. Callers guarantee `x.len() == self.dim()`.
    fn payoff(&self, x: &[f64]) -> f64;

    fn rarity(&self) -> Option<&dyn RarityEmbedding> {
        None
    }

    /// Analytical starting mixture (weights `1/m`).
    fn approx_init(&self) -> Result<MixtureParam> {
        Err(Error::ApproxUnavailable(self.name().into()))
    }
}

/// `V_δ(x) = H_δ(x) 1{F(x) ∈ ∪ A_j(δ_j)}` with `V_1 = V`.
///
/// The sets are described through per-component statistics: `F(x) ∈ A_j(δ)`
/// exactly when `rarity_statistic(j, x) >= δ`, so the largest `δ` reached
/// by at least `N0` samples is an order statistic of the statistic.
pub trait RarityEmbedding: Send + Sync {
    fn components(&self) -> usize;

    fn rarity_statistic(&self, j: usize, x: &[f64]) -> f64;

    fn payoff_delta(&self, delta: &[f64], x: &[f64]) -> f64;
}

/// `V(x)` with a dimension check.
pub fn evaluate_payoff(model: &dyn Model, x: &[f64]) -> Result<f64> {
    check_dim(model.dim(), x.len())?;
    Ok(model.payoff(x))
}

/// `V_δ(x)` for models that have a rarity embedding.
pub fn rarity_embedding(model: &dyn Model, delta: &[f64], x: &[f64]) -> Result<f64> {
    let emb = model
        .rarity()
        .ok_or_else(|| Error::EmbeddingUnavailable(model.name().into()))?;
    check_dim(emb.components(), delta.len())?;
    check_dim(model.dim(), x.len())?;
    Ok(emb.payoff_delta(delta, x))
}

pub(crate) fn require(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(what.into()))
    }
}
