//! Experiment harness for `mixtilt`: TOML configs, the reference tables,
//! and CSV output.

pub mod config;
pub mod experiment;
pub mod output;
pub mod tables;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("degenerate run: {0}")]
    Degenerate(mixtilt::Error),
    #[error("stagnant rarity: {0}")]
    Stagnant(mixtilt::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<mixtilt::Error> for RunError {
    fn from(e: mixtilt::Error) -> Self {
        match e {
            mixtilt::Error::DegenerateUpdate { .. } => RunError::Degenerate(e),
            mixtilt::Error::StagnantRarity { .. } => RunError::Stagnant(e),
            other => RunError::Config(other.to_string()),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Degenerate(_) => 3,
            RunError::Stagnant(_) => 4,
            RunError::Io(_) => 1,
        }
    }

    /// Short tag written to the `flags` column of a failed row.
    pub fn flag(&self) -> &'static str {
        match self {
            RunError::Config(_) => "error:config",
            RunError::Degenerate(_) => "error:degenerate",
            RunError::Stagnant(_) => "error:stagnant",
            RunError::Io(_) => "error:io",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelEntry {
    pub name: &'static str,
    pub description: &'static str,
    /// `(field, meaning)`; optional fields are marked.
    pub parameters: Vec<(&'static str, &'static str)>,
    pub init_methods: Vec<&'static str>,
}

/// Every model the harness can build, with its config fields and the
/// initialization methods that apply to it.
pub fn list_models() -> Vec<ModelEntry> {
    let gbm = |extra: &[(&'static str, &'static str)]| {
        let mut p = vec![
            ("s0", "initial prices, one per asset"),
            ("sigma", "volatilities, one per asset"),
            ("corr", "correlation matrix (rows)"),
            ("r", "interest rate"),
            ("maturity", "maturity T"),
            ("strike", "strike K"),
        ];
        p.extend_from_slice(extra);
        p
    };
    vec![
        ModelEntry {
            name: "two_sided_tail",
            description: "1{x >= a or x <= b} for one standard normal",
            parameters: vec![("a", "upper threshold > 0"), ("b", "lower threshold < 0")],
            init_methods: vec!["perturbation", "rarity_ce", "approx", "explicit"],
        },
        ModelEntry {
            name: "asian_call",
            description: "arithmetic Asian call on one GBM asset, discounted",
            parameters: vec![
                ("s0", "initial price"),
                ("r", "interest rate"),
                ("sigma", "volatility"),
                ("maturity", "maturity T"),
                ("strike", "strike K"),
                ("dates", "equally spaced monitoring dates (or `times`)"),
                ("times", "optional explicit monitoring times"),
            ],
            init_methods: vec!["perturbation", "approx", "explicit"],
        },
        ModelEntry {
            name: "rainbow",
            description: "call on the maximum of correlated GBM assets, discounted",
            parameters: gbm(&[]),
            init_methods: vec!["perturbation", "rarity_ce", "approx", "explicit"],
        },
        ModelEntry {
            name: "pyramid",
            description: "call on the sum of |S_i - K_i| over GBM assets, discounted",
            parameters: gbm(&[
                ("asset_strikes", "per-asset strikes K_i"),
                ("discount", "optional, default true"),
            ]),
            init_methods: vec!["perturbation", "approx", "explicit"],
        },
        ModelEntry {
            name: "cev_digital",
            description: "digital call on max(c1 S_T, c2 H_T) for two CEV assets, Euler scheme",
            parameters: vec![
                ("s0", "initial S"),
                ("h0", "initial H"),
                ("sigma1", "volatility of S"),
                ("sigma2", "volatility of H"),
                ("gamma1", "elasticity of S in [0.5, 1]"),
                ("gamma2", "elasticity of H in [0.5, 1]"),
                ("rho", "correlation of the drivers"),
                ("r", "interest rate"),
                ("maturity", "maturity T"),
                ("strike", "strike K"),
                ("c1", "scale of S"),
                ("c2", "scale of H"),
                ("steps", "Euler steps"),
                ("discount", "optional, default true"),
            ],
            // CE-based starts converge too slowly here to be useful
            init_methods: vec!["approx", "explicit"],
        },
    ]
}
