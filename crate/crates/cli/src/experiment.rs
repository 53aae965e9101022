use mixtilt::ce::{run_ce, CeConfig, CeTrace};
use mixtilt::estimator::{is_estimate, plain_mc_estimate, variance_ratio, EstimateReport};
use mixtilt::init::{init_perturbation, init_rarity_ce, RarityConfig};
use mixtilt::math::{Phase, RngStream};
use mixtilt::models::Model;
use mixtilt::tilt::{MixtureParam, TiltParam};
use serde::Serialize;

use crate::config::{ExperimentConfig, InitConfig};
use crate::RunError;

/// Tilts closer than this are reported as a collapsed mixture.
pub const COLLAPSE_DISTANCE: f64 = 0.1;

/// Offset of the perturbation draws inside the init stream, far beyond
/// anything the rarity stages consume.
const PERTURBATION_COUNTER: u64 = 1 << 48;

#[derive(Clone, Debug, Serialize)]
pub struct ResultRow {
    pub table: String,
    pub row: String,
    pub label: String,
    pub ce: EstimateReport,
    pub plain: Option<EstimateReport>,
    pub var_ratio: Option<f64>,
    pub init_theta: MixtureParam,
    /// Stages run by the rarity initializer (0 for other methods).
    pub init_stages: usize,
    pub trace: CeTrace,
    pub flags: Vec<String>,
}

impl ResultRow {
    pub fn theta(&self) -> &MixtureParam {
        &self.trace.theta
    }

    pub fn collapsed(&self) -> bool {
        self.flags.iter().any(|f| f == "collapse")
    }
}

fn initial_mixture(
    cfg: &ExperimentConfig,
    model: &dyn Model,
) -> Result<(MixtureParam, usize), RunError> {
    let seed = cfg.sampling.seed;
    let perturb_stream = RngStream::new(seed, Phase::Init).with_counter(PERTURBATION_COUNTER);
    let d = model.dim();
    match &cfg.init {
        InitConfig::Perturbation {
            components,
            base,
            scale,
        } => {
            let base = TiltParam::new(base.clone().unwrap_or_else(|| vec![0.0; d]));
            Ok((
                init_perturbation(*components, &base, *scale, perturb_stream)?,
                0,
            ))
        }
        InitConfig::RarityCe {
            rho,
            pilot_size,
            max_stages,
            start_tilts,
            scale,
            adaptive_min_weight,
        } => {
            let m = model
                .rarity()
                .ok_or_else(|| mixtilt::Error::EmbeddingUnavailable(model.name().into()))?
                .components();
            let start = match start_tilts {
                Some(t) => MixtureParam::uniform(t.iter().cloned().map(TiltParam::new).collect())?,
                None => init_perturbation(m, &TiltParam::zero(d), *scale, perturb_stream)?,
            };
            let rcfg = RarityConfig {
                rho: *rho,
                pilot_size: pilot_size.unwrap_or(cfg.ce.pilot_size),
                max_stages: *max_stages,
                adaptive_min_weight: *adaptive_min_weight,
            };
            let trace = init_rarity_ce(model, &rcfg, start, seed)?;
            Ok((trace.theta, trace.stages.len()))
        }
        InitConfig::Approx => Ok((model.approx_init()?, 0)),
        InitConfig::Explicit { weights, tilts } => Ok((
            MixtureParam::new(
                weights.clone(),
                tilts.iter().cloned().map(TiltParam::new).collect(),
            )?,
            0,
        )),
    }
}

/// Initialize, iterate CE, estimate, and (optionally) run the plain Monte
/// Carlo baseline on an independent stream of the same size.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultRow, RunError> {
    let cfg = cfg.clone().resolved()?;
    let model = cfg.model.build()?;
    let seed = cfg.sampling.seed;
    let (init_theta, init_stages) = initial_mixture(&cfg, model.as_ref())?;
    let ce_cfg = CeConfig {
        pilot_size: cfg.ce.pilot_size,
        iterations: cfg.ce.iterations,
        weight_floor: cfg.ce.weight_floor,
        degenerate_threshold: cfg.ce.degenerate_threshold,
    };
    let trace = run_ce(model.as_ref(), init_theta.clone(), &ce_cfg, seed)?;
    let n = cfg.sampling.n;
    let ce = is_estimate(
        model.as_ref(),
        &trace.theta,
        n,
        RngStream::new(seed, Phase::FinalIs),
    )?;
    let (plain, var_ratio) = if cfg.sampling.baseline {
        let plain = plain_mc_estimate(model.as_ref(), n, RngStream::new(seed, Phase::Baseline))?;
        let ratio = variance_ratio(&plain, &ce)?;
        (Some(plain), Some(ratio))
    } else {
        (None, None)
    };

    let mut flags = Vec::new();
    if trace.theta.min_tilt_separation() < COLLAPSE_DISTANCE {
        flags.push("collapse".to_string());
    }
    if ce.concentrated {
        flags.push("concentration".to_string());
    }
    if trace.records.iter().any(|r| r.warning.is_some()) {
        flags.push("few_positive".to_string());
    }
    if trace
        .records
        .iter()
        .any(|r| r.kept_previous.iter().any(|k| *k))
    {
        flags.push("kept_previous".to_string());
    }

    Ok(ResultRow {
        table: cfg.output.table.clone(),
        row: cfg.output.row.clone(),
        label: cfg.model.label(),
        ce,
        plain,
        var_ratio,
        init_theta,
        init_stages,
        trace,
        flags,
    })
}
