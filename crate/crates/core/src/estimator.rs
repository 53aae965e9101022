//! Final importance-sampling estimate, the plain Monte Carlo baseline and
//! their comparison.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::math::{read_std_normals, sample_stride, CompensatedSum, RngStream};
use crate::models::Model;
use crate::tilt::{draw_mixture, log_std_normal_density, MixtureParam};

/// Share of the estimator's sum carried by its largest term above which a
/// run is flagged as dominated by a few likelihood ratios.
pub const CONCENTRATION_THRESHOLD: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimate: f64,
    pub std_error: f64,
    /// `std_error / estimate` (infinite when the estimate is 0).
    pub relative_error: f64,
    pub n: usize,
    /// Per-sample variance (n − 1 divisor).
    pub variance: f64,
    pub min_lr: f64,
    pub max_lr: f64,
    /// Largest single `V·ℓ` term as a fraction of the total.
    pub max_share: f64,
    pub concentrated: bool,
}

impl EstimateReport {
    /// Summarize the terms `V(X_k) ℓ(X_k)` and the likelihood ratios.
    pub fn from_terms(terms: &[f64], lrs: &[f64]) -> Result<Self> {
        let n = terms.len();
        check_dim(n, lrs.len())?;
        if n < 2 {
            return Err(Error::InvalidParameter("need at least two samples".into()));
        }
        let total: f64 = terms.iter().copied().collect::<CompensatedSum>().value();
        let estimate = total / n as f64;
        let ss: f64 = terms
            .iter()
            .map(|v| (v - estimate) * (v - estimate))
            .collect::<CompensatedSum>()
            .value();
        let variance = ss / (n - 1) as f64;
        let std_error = (variance / n as f64).sqrt();
        let relative_error = if estimate > 0.0 {
            std_error / estimate
        } else {
            f64::INFINITY
        };
        let largest = terms.iter().copied().fold(0.0, f64::max);
        let max_share = if total > 0.0 { largest / total } else { 0.0 };
        Ok(Self {
            estimate,
            std_error,
            relative_error,
            n,
            variance,
            min_lr: lrs.iter().copied().fold(f64::INFINITY, f64::min),
            max_lr: lrs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            max_share,
            concentrated: max_share > CONCENTRATION_THRESHOLD,
        })
    }
}

/// Mean and standard error of `V(X) ℓ_θ(X)` over `n` draws from `h_θ`.
pub fn is_estimate(
    model: &dyn Model,
    theta: &MixtureParam,
    n: usize,
    stream: RngStream,
) -> Result<EstimateReport> {
    check_dim(model.dim(), theta.dim())?;
    let d = theta.dim();
    let m = theta.components();
    let pairs = stream.map_samples(n, sample_stride(d), |_, cursor| {
        let mut x = vec![0.0; d];
        let mut post = vec![0.0; m];
        draw_mixture(theta, cursor, &mut x);
        let log_h = theta.log_density_and_posterior(&x, &mut post);
        let lr = (log_std_normal_density(&x) - log_h).exp();
        (model.payoff(&x) * lr, lr)
    });
    let (terms, lrs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    EstimateReport::from_terms(&terms, &lrs)
}

/// Mean and standard error of `V(X)` over `n` standard normal draws.
pub fn plain_mc_estimate(model: &dyn Model, n: usize, stream: RngStream) -> Result<EstimateReport> {
    let d = model.dim();
    let terms = stream.map_samples(n, sample_stride(d), |_, cursor| {
        let mut x = vec![0.0; d];
        read_std_normals(cursor, &mut x);
        model.payoff(&x)
    });
    EstimateReport::from_terms(&terms, &vec![1.0; terms.len()])
}

/// Per-sample variance of the plain estimator over that of the IS
/// estimator; infinite when the IS variance vanishes.
pub fn variance_ratio(plain: &EstimateReport, ce: &EstimateReport) -> Result<f64> {
    if plain.n != ce.n {
        return Err(Error::UnequalSampleSize(plain.n, ce.n));
    }
    if ce.variance == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(plain.variance / ce.variance)
}
