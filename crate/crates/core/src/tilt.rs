//! Mixtures of mean-shifted standard Gaussians `N(α_j, I_d)`.
//!
//! All densities are handled in the log domain; raw densities underflow
//! long before `d = 100`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::math::{compensated_sum, read_std_normals, sample_stride, RngStream, SampleBatch};

/// ½ log 2π.
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Default lower bound on mixture weights.
pub const DEFAULT_WEIGHT_FLOOR: f64 = 1e-4;

/// Mean shift of one tilted component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TiltParam {
    pub alpha: Vec<f64>,
}

impl TiltParam {
    pub fn new(alpha: Vec<f64>) -> Self {
        Self { alpha }
    }

    pub fn zero(d: usize) -> Self {
        Self {
            alpha: vec![0.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn distance(&self, other: &TiltParam) -> f64 {
        self.alpha
            .iter()
            .zip(&other.alpha)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl From<Vec<f64>> for TiltParam {
    fn from(alpha: Vec<f64>) -> Self {
        Self { alpha }
    }
}

/// Weights and tilts of a Gaussian mean-shift mixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureParam {
    weights: Vec<f64>,
    tilts: Vec<TiltParam>,
}

impl MixtureParam {
    /// Weights must be positive and sum to one (they are renormalized to
    /// absorb rounding); tilts must share a dimension.
    pub fn new(weights: Vec<f64>, tilts: Vec<TiltParam>) -> Result<Self> {
        let m = weights.len();
        if m == 0 {
            return Err(Error::InvalidParameter(
                "mixture needs at least one component".into(),
            ));
        }
        check_dim(m, tilts.len())?;
        let d = tilts[0].dim();
        if d == 0 {
            return Err(Error::InvalidParameter("zero-dimensional tilt".into()));
        }
        for t in &tilts {
            check_dim(d, t.dim())?;
            if t.alpha.iter().any(|a| !a.is_finite()) {
                return Err(Error::InvalidParameter("non-finite tilt".into()));
            }
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "weights must be positive: {weights:?}"
            )));
        }
        let total = order_free_sum(weights.iter().copied());
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "weights sum to {total}, not 1"
            )));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { weights, tilts })
    }

    /// Equal weights `1/m`.
    pub fn uniform(tilts: Vec<TiltParam>) -> Result<Self> {
        let m = tilts.len();
        let mut theta = Self::new(vec![1.0 / m as f64; m], tilts)?;
        // skip the renormalization so every weight is exactly 1/m
        theta.weights = vec![1.0 / m as f64; m];
        Ok(theta)
    }

    pub fn single(alpha: TiltParam) -> Self {
        Self {
            weights: vec![1.0],
            tilts: vec![alpha],
        }
    }

    /// Build from nonnegative raw weights, clamping every weight to at least
    /// `floor` and renormalizing the rest.
    pub fn with_floor(raw_weights: &[f64], tilts: Vec<TiltParam>, floor: f64) -> Result<Self> {
        let weights = floor_weights(raw_weights, floor)?;
        Self::new(weights, tilts)
    }

    pub fn components(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.tilts[0].dim()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tilts(&self) -> &[TiltParam] {
        &self.tilts
    }

    /// Same mixture with components reordered: component `i` of the result
    /// is component `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            weights: order.iter().map(|&i| self.weights[i]).collect(),
            tilts: order.iter().map(|&i| self.tilts[i].clone()).collect(),
        }
    }

    /// Smallest pairwise distance between tilts (infinite for `m = 1`).
    pub fn min_tilt_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.tilts.len() {
            for j in 0..i {
                best = best.min(self.tilts[i].distance(&self.tilts[j]));
            }
        }
        best
    }

    /// log h_θ(x); also writes the component posteriors into `post`.
    pub(crate) fn log_density_and_posterior(&self, x: &[f64], post: &mut [f64]) -> f64 {
        mixture_terms(&self.weights, &self.tilts, x, post)
    }
}

/// Sum that does not depend on the order of `values`, so relabeling
/// components reproduces results bit for bit.
pub(crate) fn order_free_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    compensated_sum(v)
}

/// Clamp nonnegative weights to `floor` and renormalize the unclamped ones
/// so the total stays 1.
pub fn floor_weights(raw: &[f64], floor: f64) -> Result<Vec<f64>> {
    let m = raw.len();
    if m == 0 {
        return Err(Error::InvalidParameter("no weights".into()));
    }
    if !(floor > 0.0) || floor * m as f64 >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "weight floor {floor} must lie in (0, 1/{m})"
        )));
    }
    if raw.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "invalid raw weights {raw:?}"
        )));
    }
    let total = order_free_sum(raw.iter().copied());
    if total <= 0.0 {
        return Err(Error::InvalidParameter("raw weights are all zero".into()));
    }
    let mut w: Vec<f64> = raw.iter().map(|v| v / total).collect();
    let mut clamped = vec![false; m];
    loop {
        let mut changed = false;
        for (wi, ci) in w.iter_mut().zip(clamped.iter_mut()) {
            if !*ci && *wi < floor {
                *ci = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let n_clamped = clamped.iter().filter(|c| **c).count();
        let free_mass = 1.0 - floor * n_clamped as f64;
        let free_total = order_free_sum(
            w.iter()
                .zip(&clamped)
                .filter(|(_, c)| !**c)
                .map(|(v, _)| *v),
        );
        for (wi, ci) in w.iter_mut().zip(&clamped) {
            *wi = if *ci {
                floor
            } else {
                *wi * free_mass / free_total
            };
        }
    }
    Ok(w)
}

fn sq_dist(x: &[f64], alpha: &[f64]) -> f64 {
    x.iter().zip(alpha).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn log_phi_shifted(x: &[f64], alpha: &[f64]) -> f64 {
    -0.5 * sq_dist(x, alpha) - HALF_LN_2PI * x.len() as f64
}

/// Log of the standard normal density φ_d(x).
pub fn log_std_normal_density(x: &[f64]) -> f64 {
    -0.5 * x.iter().map(|v| v * v).sum::<f64>() - HALF_LN_2PI * x.len() as f64
}

/// Shared kernel: returns log Σ w_j φ(x − α_j) and writes normalized
/// posteriors. Weights may contain zeros (raw CE updates).
pub(crate) fn mixture_terms(
    weights: &[f64],
    tilts: &[TiltParam],
    x: &[f64],
    post: &mut [f64],
) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for ((p, w), t) in post.iter_mut().zip(weights).zip(tilts) {
        *p = w.ln() + log_phi_shifted(x, &t.alpha);
        max = max.max(*p);
    }
    let mut total = 0.0;
    for p in post.iter_mut() {
        *p = (*p - max).exp();
        total += *p;
    }
    for p in post.iter_mut() {
        *p /= total;
    }
    max + total.ln()
}

/// log φ_d(x − α).
pub fn log_component_density(alpha: &TiltParam, x: &[f64]) -> Result<f64> {
    check_dim(alpha.dim(), x.len())?;
    Ok(log_phi_shifted(x, &alpha.alpha))
}

/// log h_θ(x) by max-shifted summation.
pub fn log_mixture_density(theta: &MixtureParam, x: &[f64]) -> Result<f64> {
    check_dim(theta.dim(), x.len())?;
    let mut post = vec![0.0; theta.components()];
    Ok(theta.log_density_and_posterior(x, &mut post))
}

/// Component responsibilities h_θ(j | x).
pub fn posterior(theta: &MixtureParam, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(theta.dim(), x.len())?;
    let mut post = vec![0.0; theta.components()];
    theta.log_density_and_posterior(x, &mut post);
    Ok(post)
}

/// ℓ_θ(x) = φ_d(x) / h_θ(x).
pub fn likelihood_ratio(theta: &MixtureParam, x: &[f64]) -> Result<f64> {
    Ok((log_std_normal_density(x) - log_mixture_density(theta, x)?).exp())
}

/// Component index for a uniform selector.
fn pick_component(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (j, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return j;
        }
    }
    weights.len() - 1
}

/// Draw one sample from `theta` at the cursor; returns its component.
pub(crate) fn draw_mixture(
    theta: &MixtureParam,
    cursor: &mut crate::math::StreamCursor,
    out: &mut [f64],
) -> usize {
    let u = read_std_normals(cursor, out);
    let j = if theta.components() == 1 {
        0
    } else {
        pick_component(&theta.weights, u)
    };
    for (x, a) in out.iter_mut().zip(&theta.tilts[j].alpha) {
        *x += a;
    }
    j
}

/// `n` i.i.d. draws from h_θ: component J ~ weights, then N(α_J, I_d).
pub fn sample_mixture(theta: &MixtureParam, n: usize, stream: RngStream) -> SampleBatch {
    assert!(n >= 1, "need n >= 1");
    let d = theta.dim();
    let draws = stream.map_samples(n, sample_stride(d), |_, cursor| {
        let mut x = vec![0.0; d];
        let j = draw_mixture(theta, cursor, &mut x);
        (x, j)
    });
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for (x, j) in draws {
        data.extend_from_slice(&x);
        labels.push(j);
    }
    SampleBatch::from_parts(d, data, Some(labels), stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{compensated_sum, Phase};

    fn t(v: &[f64]) -> TiltParam {
        TiltParam::new(v.to_vec())
    }

    #[test]
    fn component_density_at_origin() {
        let v = log_component_density(&t(&[0.0]), &[0.0]).unwrap();
        assert!((v + 0.918939).abs() < 1e-6);
        assert!(log_component_density(&t(&[0.0]), &[0.0, 1.0]).is_err());
    }

    #[test]
    fn component_density_peaks_at_mode() {
        let x = [0.3, -1.2];
        let at_mode = log_component_density(&t(&x), &x).unwrap();
        for shift in [0.01, 0.5, -2.0] {
            let other = t(&[x[0] + shift, x[1] - shift]);
            assert!(log_component_density(&other, &x).unwrap() < at_mode);
        }
    }

    #[test]
    fn component_density_direct_formula() {
        let a = [0.4, -1.1, 2.0];
        let x = [1.3, 0.2, -0.7];
        let direct = -0.5 * ((0.9f64).powi(2) + 1.3f64.powi(2) + 2.7f64.powi(2))
            - 1.5 * (2.0 * std::f64::consts::PI).ln();
        assert!((log_component_density(&t(&a), &x).unwrap() - direct).abs() < 1e-13);
    }

    #[test]
    fn mixture_reductions() {
        let x = [0.7, -0.2];
        let single = MixtureParam::single(t(&[1.0, 1.0]));
        assert_eq!(
            log_mixture_density(&single, &x).unwrap(),
            log_component_density(&t(&[1.0, 1.0]), &x).unwrap()
        );
        let twin = MixtureParam::uniform(vec![t(&[1.0, 1.0]), t(&[1.0, 1.0])]).unwrap();
        assert!(
            (log_mixture_density(&twin, &x).unwrap()
                - log_component_density(&t(&[1.0, 1.0]), &x).unwrap())
            .abs()
                < 1e-14
        );
    }

    #[test]
    fn two_component_direct_evaluation() {
        let th = MixtureParam::new(vec![0.3, 0.7], vec![t(&[-1.0]), t(&[1.0])]).unwrap();
        let phi1 = (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let direct = (0.3 * phi1 + 0.7 * phi1).ln();
        assert!((log_mixture_density(&th, &[0.0]).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn mixture_density_is_finite_far_out() {
        let th = MixtureParam::uniform(vec![t(&[-1.0, 0.0]), t(&[1.0, 2.0])]).unwrap();
        let v = log_mixture_density(&th, &[1000.0, -1000.0]).unwrap();
        assert!(v.is_finite());
        let p = posterior(&th, &[1000.0, -1000.0]).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn posterior_examples() {
        let twin = MixtureParam::uniform(vec![t(&[0.5]), t(&[0.5])]).unwrap();
        assert_eq!(posterior(&twin, &[3.0]).unwrap(), vec![0.5, 0.5]);
        let single = MixtureParam::single(t(&[0.5]));
        assert_eq!(posterior(&single, &[3.0]).unwrap(), vec![1.0]);
        let far = MixtureParam::uniform(vec![t(&[-10.0]), t(&[10.0])]).unwrap();
        assert!(posterior(&far, &[10.0]).unwrap()[1] > 1.0 - 1e-8);
    }

    #[test]
    fn likelihood_ratio_examples() {
        let id = MixtureParam::single(TiltParam::zero(1));
        for x in [-3.0, 0.0, 0.4, 7.0] {
            assert_eq!(likelihood_ratio(&id, &[x]).unwrap(), 1.0);
        }
        let shifted = MixtureParam::single(t(&[2.0]));
        // exp(α²/2 − αx) at α = 2, x = 1
        assert!((likelihood_ratio(&shifted, &[1.0]).unwrap() - 1.0).abs() < 1e-14);
        let closed = (2.0f64 * 2.0 / 2.0 - 2.0 * 0.3).exp();
        assert!((likelihood_ratio(&shifted, &[0.3]).unwrap() - closed).abs() < 1e-12 * closed);
    }

    #[test]
    fn lr_has_unit_mean_under_mixture() {
        let th = MixtureParam::new(vec![0.6, 0.4], vec![t(&[1.0, -0.5]), t(&[-1.5, 0.5])]).unwrap();
        let n = 100_000;
        let b = sample_mixture(&th, n, RngStream::new(21, Phase::Pilot));
        let lr: Vec<f64> = b
            .rows()
            .map(|x| likelihood_ratio(&th, x).unwrap())
            .collect();
        let mean = compensated_sum(lr.iter().copied()) / n as f64;
        let var = compensated_sum(lr.iter().map(|v| (v - mean).powi(2))) / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 4.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn sampling_examples() {
        let n = 100_000;
        let id = MixtureParam::single(TiltParam::zero(1));
        let b = sample_mixture(&id, n, RngStream::new(2, Phase::Pilot));
        let mean = compensated_sum(b.rows().map(|r| r[0])) / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());

        let floor = 1e-4;
        let lopsided =
            MixtureParam::new(vec![1.0 - floor, floor], vec![t(&[0.0]), t(&[5.0])]).unwrap();
        let b = sample_mixture(&lopsided, n, RngStream::new(3, Phase::Pilot));
        let count = b.labels().unwrap().iter().filter(|j| **j == 1).count();
        // Binomial(1e5, 1e-4): mean 10, P(count > 50) is negligible.
        assert!(count <= 50, "count {count}");

        let s = RngStream::new(4, Phase::Init);
        assert_eq!(
            sample_mixture(&lopsided, 500, s),
            sample_mixture(&lopsided, 500, s)
        );
    }

    #[test]
    fn floor_clamps_and_renormalizes() {
        let w = floor_weights(&[0.0, 0.3, 0.7], 1e-4).unwrap();
        assert_eq!(w[0], 1e-4);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(w.iter().all(|v| *v >= 1e-4));
        let w = floor_weights(&[1.0, 0.0, 0.0, 0.0], 0.2).unwrap();
        assert!((w[0] - 0.4).abs() < 1e-15);
        assert!(floor_weights(&[0.5, 0.5], 0.5).is_err());
        assert!(floor_weights(&[0.0, 0.0], 0.1).is_err());
    }

    #[test]
    fn invalid_mixtures_are_rejected() {
        assert!(MixtureParam::new(vec![], vec![]).is_err());
        assert!(MixtureParam::new(vec![0.5, 0.5], vec![t(&[0.0])]).is_err());
        assert!(MixtureParam::new(vec![1.0, 0.0], vec![t(&[0.0]), t(&[1.0])]).is_err());
        assert!(MixtureParam::new(vec![0.5, 0.4], vec![t(&[0.0]), t(&[1.0])]).is_err());
        assert!(MixtureParam::new(vec![0.5, 0.5], vec![t(&[0.0]), t(&[1.0, 2.0])]).is_err());
    }
}
