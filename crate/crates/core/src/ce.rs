//! Cross-entropy updates for single Gaussian tilts and for mixtures, and
//! the outer iteration loop.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::math::{CompensatedSum, Phase, RngStream, SampleBatch};
use crate::models::Model;
use crate::tilt::{
    floor_weights, log_std_normal_density, mixture_terms, order_free_sum, sample_mixture,
    MixtureParam, TiltParam, DEFAULT_WEIGHT_FLOOR,
};

/// A pilot sample together with `V(X_k)`, `ℓ(X_k)` and the component
/// posteriors under the mixture that generated it.
#[derive(Clone, Debug)]
pub struct PilotEvaluation {
    samples: SampleBatch,
    payoff: Vec<f64>,
    lr: Vec<f64>,
    /// Row-major `N × m`.
    posteriors: Vec<f64>,
    m: usize,
}

impl PilotEvaluation {
    /// Assemble an evaluation from explicit values.
    pub fn new(
        samples: SampleBatch,
        payoff: Vec<f64>,
        lr: Vec<f64>,
        posteriors: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = samples.len();
        check_dim(n, payoff.len())?;
        check_dim(n, lr.len())?;
        check_dim(n, posteriors.len())?;
        let m = posteriors.first().map_or(0, Vec::len);
        if m == 0 {
            return Err(Error::InvalidParameter(
                "posteriors need at least one component".into(),
            ));
        }
        if payoff.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "payoffs must be finite and nonnegative".into(),
            ));
        }
        if lr.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "likelihood ratios must be positive".into(),
            ));
        }
        let mut flat = Vec::with_capacity(n * m);
        for row in &posteriors {
            check_dim(m, row.len())?;
            flat.extend_from_slice(row);
        }
        Ok(Self {
            samples,
            payoff,
            lr,
            posteriors: flat,
            m,
        })
    }

    /// Evaluate `payoff`, `ℓ_θ` and the posteriors of `theta` on every sample.
    pub fn evaluate<F>(theta: &MixtureParam, samples: SampleBatch, payoff: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        check_dim(theta.dim(), samples.dim())?;
        let d = samples.dim();
        let m = theta.components();
        let rows: Vec<(f64, f64, Vec<f64>)> = samples
            .data()
            .par_chunks_exact(d)
            .map(|x| {
                let mut post = vec![0.0; m];
                let log_h = theta.log_density_and_posterior(x, &mut post);
                let lr = (log_std_normal_density(x) - log_h).exp();
                (payoff(x), lr, post)
            })
            .collect();
        let n = rows.len();
        let mut values = Vec::with_capacity(n);
        let mut lrs = Vec::with_capacity(n);
        let mut posteriors = Vec::with_capacity(n * m);
        for (v, lr, post) in rows {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "payoff {v} is not finite and nonnegative"
                )));
            }
            values.push(v);
            lrs.push(lr);
            posteriors.extend_from_slice(&post);
        }
        Ok(Self {
            samples,
            payoff: values,
            lr: lrs,
            posteriors,
            m,
        })
    }

    pub fn samples(&self) -> &SampleBatch {
        &self.samples
    }

    pub fn payoff(&self) -> &[f64] {
        &self.payoff
    }

    pub fn lr(&self) -> &[f64] {
        &self.lr
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn posterior_row(&self, k: usize) -> &[f64] {
        &self.posteriors[k * self.m..(k + 1) * self.m]
    }

    /// Number of samples with positive payoff.
    pub fn positive_count(&self) -> usize {
        self.payoff.iter().filter(|v| **v > 0.0).count()
    }

    /// The same samples with every payoff multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            payoff: self.payoff.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    /// `V(X_k) ℓ(X_k)`.
    fn weight(&self, k: usize) -> f64 {
        self.payoff[k] * self.lr[k]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CeConfig {
    pub pilot_size: usize,
    pub iterations: usize,
    pub weight_floor: f64,
    /// Fewer positive-payoff pilot samples than this is reported as a warning.
    pub degenerate_threshold: usize,
}

impl Default for CeConfig {
    fn default() -> Self {
        Self {
            pilot_size: 10_000,
            iterations: 5,
            weight_floor: DEFAULT_WEIGHT_FLOOR,
            degenerate_threshold: 10,
        }
    }
}

impl CeConfig {
    pub fn validate(&self, m: usize) -> Result<()> {
        if self.pilot_size < 1 || self.iterations < 1 {
            return Err(Error::InvalidParameter(
                "pilot size and iterations must be >= 1".into(),
            ));
        }
        if !(self.weight_floor > 0.0) || self.weight_floor * m as f64 >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "weight floor {} must lie in (0, 1/{m})",
                self.weight_floor
            )));
        }
        Ok(())
    }
}

/// Unfloored mixture update. Components that received no mass keep their
/// previous tilt and get weight zero.
#[derive(Clone, Debug, PartialEq)]
pub struct RawUpdate {
    pub weights: Vec<f64>,
    pub tilts: Vec<TiltParam>,
    pub kept_previous: Vec<bool>,
}

impl RawUpdate {
    /// Floor the weights and build a valid mixture.
    pub fn floored(self, floor: f64) -> Result<MixtureParam> {
        MixtureParam::new(floor_weights(&self.weights, floor)?, self.tilts)
    }

    pub fn objective(&self, eval: &PilotEvaluation) -> f64 {
        objective(eval, &self.weights, &self.tilts)
    }
}

/// Weighted sample mean `Σ Vℓ X / Σ Vℓ` for a single Gaussian tilt.
pub fn basic_update(eval: &PilotEvaluation) -> Result<TiltParam> {
    if eval.m != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: eval.m,
        });
    }
    let (mass, num) = accumulate(eval);
    if !(mass[0].value() > 0.0) {
        return Err(Error::DegenerateUpdate { iteration: 0 });
    }
    Ok(mean_of(&num, mass[0].value()))
}

/// One CE-EM step without the weight floor.
pub fn mixture_update_raw(eval: &PilotEvaluation, prev: &MixtureParam) -> Result<RawUpdate> {
    check_dim(prev.components(), eval.m)?;
    check_dim(prev.dim(), eval.samples.dim())?;
    let d = prev.dim();
    let (mass, num) = accumulate(eval);
    let total = order_free_sum(mass.iter().map(CompensatedSum::value));
    if !(total > 0.0) {
        return Err(Error::DegenerateUpdate { iteration: 0 });
    }
    let mut weights = Vec::with_capacity(eval.m);
    let mut tilts = Vec::with_capacity(eval.m);
    let mut kept_previous = Vec::with_capacity(eval.m);
    for (j, mj) in mass.iter().enumerate() {
        let mj = mj.value();
        if mj > 0.0 {
            weights.push(mj / total);
            tilts.push(mean_of(&num[j * d..(j + 1) * d], mj));
            kept_previous.push(false);
        } else {
            weights.push(0.0);
            tilts.push(prev.tilts()[j].clone());
            kept_previous.push(true);
        }
    }
    Ok(RawUpdate {
        weights,
        tilts,
        kept_previous,
    })
}

/// One CE-EM step: posterior-weighted means and masses, weights floored.
pub fn mixture_update(
    eval: &PilotEvaluation,
    prev: &MixtureParam,
    weight_floor: f64,
) -> Result<MixtureParam> {
    mixture_update_raw(eval, prev)?.floored(weight_floor)
}

/// `J(θ) = (1/N) Σ_k V(X_k) ℓ(X_k) log h_θ(X_k)`.
pub fn surrogate_objective(eval: &PilotEvaluation, theta: &MixtureParam) -> Result<f64> {
    check_dim(theta.dim(), eval.samples.dim())?;
    Ok(objective(eval, theta.weights(), theta.tilts()))
}

fn objective(eval: &PilotEvaluation, weights: &[f64], tilts: &[TiltParam]) -> f64 {
    let mut post = vec![0.0; weights.len()];
    let mut sum = CompensatedSum::new();
    for (k, x) in eval.samples.rows().enumerate() {
        let w = eval.weight(k);
        if w > 0.0 {
            sum.add(w * mixture_terms(weights, tilts, x, &mut post));
        }
    }
    sum.value() / eval.samples.len() as f64
}

/// Per-component masses `Σ Vℓ·post_j` and first moments `Σ Vℓ·post_j·X`.
fn accumulate(eval: &PilotEvaluation) -> (Vec<CompensatedSum>, Vec<CompensatedSum>) {
    let d = eval.samples.dim();
    let m = eval.m;
    let mut mass = vec![CompensatedSum::new(); m];
    let mut num = vec![CompensatedSum::new(); m * d];
    for (k, x) in eval.samples.rows().enumerate() {
        let w = eval.weight(k);
        if w == 0.0 {
            continue;
        }
        for (j, p) in eval.posterior_row(k).iter().enumerate() {
            let wj = w * p;
            if wj == 0.0 {
                continue;
            }
            mass[j].add(wj);
            for (acc, xi) in num[j * d..(j + 1) * d].iter_mut().zip(x) {
                acc.add(wj * xi);
            }
        }
    }
    (mass, num)
}

fn mean_of(num: &[CompensatedSum], mass: f64) -> TiltParam {
    TiltParam::new(num.iter().map(|s| s.value() / mass).collect())
}

/// One CE iteration as recorded in the trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u32,
    /// Mixture the pilot was drawn from.
    pub theta: MixtureParam,
    /// Surrogate objective at `theta` on this pilot.
    pub objective: f64,
    pub positive_payoffs: usize,
    pub kept_previous: Vec<bool>,
    pub warning: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CeTrace {
    pub records: Vec<IterationRecord>,
    pub theta: MixtureParam,
}

/// Iterate: draw a pilot from the current mixture, evaluate, update.
/// Iteration `i` reads stream `(seed, pilot, i)`.
pub fn run_ce(
    model: &dyn Model,
    theta0: MixtureParam,
    cfg: &CeConfig,
    seed: u64,
) -> Result<CeTrace> {
    cfg.validate(theta0.components())?;
    check_dim(model.dim(), theta0.dim())?;
    let mut theta = theta0;
    let mut records = Vec::with_capacity(cfg.iterations);
    for i in 0..cfg.iterations as u32 {
        let stream = RngStream::new(seed, Phase::Pilot).at_iteration(i);
        let samples = sample_mixture(&theta, cfg.pilot_size, stream);
        let eval = PilotEvaluation::evaluate(&theta, samples, |x| model.payoff(x))?;
        let positive = eval.positive_count();
        let raw = mixture_update_raw(&eval, &theta).map_err(|e| match e {
            Error::DegenerateUpdate { .. } => Error::DegenerateUpdate {
                iteration: i as usize,
            },
            other => other,
        })?;
        let warning = (positive < cfg.degenerate_threshold).then(|| {
            format!(
                "only {positive} of {} pilot samples have positive payoff",
                cfg.pilot_size
            )
        });
        records.push(IterationRecord {
            iteration: i,
            objective: surrogate_objective(&eval, &theta)?,
            theta: theta.clone(),
            positive_payoffs: positive,
            kept_previous: raw.kept_previous.clone(),
            warning,
        });
        theta = raw.floored(cfg.weight_floor)?;
    }
    Ok(CeTrace { records, theta })
}
