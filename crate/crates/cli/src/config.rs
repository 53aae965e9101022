//! Experiment configuration files.
//!
//! A config is TOML with five sections. Only `[model]` and `[init]` are
//! required; everything else has defaults, and the fully resolved config
//! is echoed next to every result row.
//!
//! ```toml
//! [model]
//! kind = "two_sided_tail"
//! a = 2.0
//! b = -2.5
//!
//! [init]
//! method = "rarity_ce"
//! rho = 0.05
//! start_tilts = [[0.0], [-0.1]]
//!
//! [ce]
//! pilot_size = 20000
//! iterations = 5
//!
//! [sampling]
//! n = 1000000
//! seed = 7
//!
//! [output]
//! path = "two_sided.csv"
//! ```

use std::path::{Path, PathBuf};

use mixtilt::models::{
    AsianCall, AsianSpec, CevDigital, CevSpec, Model, PyramidCall, PyramidSpec, Rainbow,
    RainbowSpec, TwoSidedTail, TwoSidedTailSpec,
};
use mixtilt::tilt::DEFAULT_WEIGHT_FLOOR;
use serde::{Deserialize, Serialize};

use crate::RunError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub init: InitConfig,
    #[serde(default)]
    pub ce: CeSection,
    #[serde(default)]
    pub sampling: SamplingSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    TwoSidedTail(TwoSidedTailSpec),
    AsianCall(AsianConfig),
    Rainbow(RainbowSpec),
    Pyramid(PyramidSpec),
    CevDigital(CevSpec),
}

/// Asian option parameters; give either `dates` (equally spaced monitoring)
/// or explicit `times`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsianConfig {
    pub s0: f64,
    pub r: f64,
    pub sigma: f64,
    pub maturity: f64,
    pub strike: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
}

impl AsianConfig {
    fn spec(&self) -> Result<AsianSpec, RunError> {
        match (&self.times, self.dates) {
            (Some(times), _) => Ok(AsianSpec {
                s0: self.s0,
                r: self.r,
                sigma: self.sigma,
                maturity: self.maturity,
                times: times.clone(),
                strike: self.strike,
            }),
            (None, Some(d)) if d >= 1 => Ok(AsianSpec::uniform(
                self.s0,
                self.r,
                self.sigma,
                self.maturity,
                d,
                self.strike,
            )),
            _ => Err(RunError::Config(
                "asian_call needs `dates` >= 1 or explicit `times`".into(),
            )),
        }
    }
}

impl ModelConfig {
    pub fn build(&self) -> Result<Box<dyn Model>, RunError> {
        Ok(match self {
            ModelConfig::TwoSidedTail(s) => Box::new(TwoSidedTail::new(*s)?),
            ModelConfig::AsianCall(c) => Box::new(AsianCall::new(c.spec()?)?),
            ModelConfig::Rainbow(s) => Box::new(Rainbow::new(s.clone())?),
            ModelConfig::Pyramid(s) => Box::new(PyramidCall::new(s.clone())?),
            ModelConfig::CevDigital(s) => Box::new(CevDigital::new(s.clone())?),
        })
    }

    /// Strike (or `{a,b}` pair) used to label result rows.
    pub fn label(&self) -> String {
        match self {
            ModelConfig::TwoSidedTail(s) => format!("{{{},{}}}", s.a, s.b),
            ModelConfig::AsianCall(c) => format!("{}", c.strike),
            ModelConfig::Rainbow(s) => format!("{}", s.strike),
            ModelConfig::Pyramid(s) => format!("{}", s.strike),
            ModelConfig::CevDigital(s) => format!("{}", s.strike),
        }
    }
}

fn default_scale() -> f64 {
    mixtilt::init::DEFAULT_PERTURBATION_SCALE
}

fn default_rho() -> f64 {
    0.05
}

fn default_max_stages() -> usize {
    50
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitConfig {
    /// `components` tilts drawn uniformly from a box around `base`
    /// (the origin by default).
    Perturbation {
        components: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base: Option<Vec<f64>>,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// Rarity-parameter CE from `start_tilts` (equal weights), or from a
    /// perturbation of the origin when they are omitted.
    RarityCe {
        #[serde(default = "default_rho")]
        rho: f64,
        /// Defaults to the CE pilot size.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pilot_size: Option<usize>,
        #[serde(default = "default_max_stages")]
        max_stages: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        start_tilts: Option<Vec<Vec<f64>>>,
        #[serde(default = "default_scale")]
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        adaptive_min_weight: Option<f64>,
    },
    /// The model's analytical starting mixture.
    Approx,
    /// A fully specified starting mixture.
    Explicit {
        weights: Vec<f64>,
        tilts: Vec<Vec<f64>>,
    },
}

fn default_pilot() -> usize {
    10_000
}

fn default_iterations() -> usize {
    5
}

fn default_floor() -> f64 {
    DEFAULT_WEIGHT_FLOOR
}

fn default_threshold() -> usize {
    10
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CeSection {
    #[serde(default = "default_pilot")]
    pub pilot_size: usize,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_floor")]
    pub weight_floor: f64,
    #[serde(default = "default_threshold")]
    pub degenerate_threshold: usize,
}

impl Default for CeSection {
    fn default() -> Self {
        Self {
            pilot_size: default_pilot(),
            iterations: default_iterations(),
            weight_floor: default_floor(),
            degenerate_threshold: default_threshold(),
        }
    }
}

fn default_n() -> usize {
    100_000
}

fn default_seed() -> u64 {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    /// Final importance-sampling size (and plain Monte Carlo size).
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Also run plain Monte Carlo to report the variance ratio.
    #[serde(default = "default_true")]
    pub baseline: bool,
}

impl Default for SamplingSection {
    fn default() -> Self {
        Self {
            n: default_n(),
            seed: default_seed(),
            baseline: true,
        }
    }
}

fn default_table() -> String {
    "custom".into()
}

fn default_row() -> String {
    "1".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default = "default_table")]
    pub table: String,
    #[serde(default = "default_row")]
    pub row: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            path: None,
            table: default_table(),
            row: default_row(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, RunError> {
        let cfg: Self = toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        cfg.resolved()
    }

    pub fn from_path(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Check invariants and fill in the defaults that depend on other
    /// sections.
    pub fn resolved(mut self) -> Result<Self, RunError> {
        let bad = |msg: &str| Err(RunError::Config(msg.into()));
        if self.ce.pilot_size < 1 || self.ce.iterations < 1 {
            return bad("ce.pilot_size and ce.iterations must be >= 1");
        }
        if self.sampling.n < 2 {
            return bad("sampling.n must be >= 2");
        }
        match &mut self.init {
            InitConfig::Perturbation { components, .. } if *components < 1 => {
                return bad("init.components must be >= 1")
            }
            InitConfig::RarityCe {
                rho, pilot_size, ..
            } => {
                if !(*rho > 0.0 && *rho < 1.0) {
                    return bad("init.rho must lie in (0, 1)");
                }
                pilot_size.get_or_insert(self.ce.pilot_size);
            }
            _ => {}
        }
        Ok(self)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
