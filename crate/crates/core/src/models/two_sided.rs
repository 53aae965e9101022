use serde::{Deserialize, Serialize};

use super::{require, Model, RarityEmbedding};
use crate::error::Result;
use crate::tilt::{MixtureParam, TiltParam};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoSidedTailSpec {
    pub a: f64,
    pub b: f64,
}

/// `P{X ≥ a or X ≤ b}` for a standard normal `X`.
#[derive(Clone, Debug)]
pub struct TwoSidedTail {
    spec: TwoSidedTailSpec,
}

impl TwoSidedTail {
    pub fn new(spec: TwoSidedTailSpec) -> Result<Self> {
        require(
            spec.b < 0.0 && spec.a > 0.0,
            "two-sided tail needs b < 0 < a",
        )?;
        Ok(Self { spec })
    }

    pub fn spec(&self) -> &TwoSidedTailSpec {
        &self.spec
    }
}

impl Model for TwoSidedTail {
    fn name(&self) -> &'static str {
        "two_sided_tail"
    }

    fn dim(&self) -> usize {
        1
    }

    fn payoff(&self, x: &[f64]) -> f64 {
        let x = x[0];
        if x >= self.spec.a || x <= self.spec.b {
            1.0
        } else {
            0.0
        }
    }

    fn rarity(&self) -> Option<&dyn RarityEmbedding> {
        Some(self)
    }

    /// Shift one component onto each boundary.
    fn approx_init(&self) -> Result<MixtureParam> {
        MixtureParam::uniform(vec![
            TiltParam::new(vec![self.spec.a]),
            TiltParam::new(vec![self.spec.b]),
        ])
    }
}

impl RarityEmbedding for TwoSidedTail {
    fn components(&self) -> usize {
        2
    }

    // A_1(δ) = [δa, ∞), A_2(δ) = (−∞, δb]
    fn rarity_statistic(&self, j: usize, x: &[f64]) -> f64 {
        match j {
            0 => x[0] / self.spec.a,
            _ => x[0] / self.spec.b,
        }
    }

    fn payoff_delta(&self, delta: &[f64], x: &[f64]) -> f64 {
        let x = x[0];
        if x >= delta[0] * self.spec.a || x <= delta[1] * self.spec.b {
            1.0
        } else {
            0.0
        }
    }
}
