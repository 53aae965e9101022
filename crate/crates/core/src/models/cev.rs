use serde::{Deserialize, Serialize};

use super::{require, Model};
use crate::error::{check_dim, Result};
use crate::tilt::{MixtureParam, TiltParam};

fn default_true() -> bool {
    true
}

/// Digital call on the larger of two correlated CEV assets,
/// `1{max(c₁S_T, c₂H_T) ≥ K}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CevSpec {
    pub s0: f64,
    pub h0: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub rho: f64,
    pub r: f64,
    pub maturity: f64,
    pub strike: f64,
    pub c1: f64,
    pub c2: f64,
    /// Euler steps; the innovation vector has `2 * steps` coordinates.
    pub steps: usize,
    /// Multiply the indicator by `e^{−rT}`.
    #[serde(default = "default_true")]
    pub discount: bool,
}

/// Euler discretization of the discounted dynamics
/// `dX = σ₁e^{−r(1−γ₁)t}X^{γ₁}dW`, `dY = σ₂e^{−r(1−γ₂)t}Y^{γ₂}dB`, driven by
/// `W`-increments `√Δt Z_i` and `B`-increments `√Δt (ρZ_i + √(1−ρ²)R_i)`.
/// Innovations are packed `(Z_1, R_1, …, Z_n, R_n)`.
#[derive(Clone, Debug)]
pub struct CevDigital {
    spec: CevSpec,
    dt: f64,
    /// σ₁ e^{−r(1−γ₁)t_i} √Δt per step
    coef_x: Vec<f64>,
    coef_y: Vec<f64>,
    rho_perp: f64,
    growth: f64,
    discount: f64,
}

impl CevDigital {
    pub fn new(spec: CevSpec) -> Result<Self> {
        require(spec.steps >= 1, "need at least one Euler step")?;
        require(
            spec.s0 > 0.0 && spec.h0 > 0.0,
            "initial prices must be positive",
        )?;
        require(
            spec.sigma1 >= 0.0 && spec.sigma2 >= 0.0,
            "volatilities must be nonnegative",
        )?;
        require(
            (0.5..=1.0).contains(&spec.gamma1) && (0.5..=1.0).contains(&spec.gamma2),
            "elasticities must lie in [0.5, 1]",
        )?;
        require(spec.rho > -1.0 && spec.rho < 1.0, "rho must lie in (-1, 1)")?;
        require(spec.maturity > 0.0, "maturity must be positive")?;
        require(
            spec.c1 > 0.0 && spec.c2 > 0.0,
            "scales c1, c2 must be positive",
        )?;
        let dt = spec.maturity / spec.steps as f64;
        let coef = |sigma: f64, gamma: f64| -> Vec<f64> {
            (0..spec.steps)
                .map(|i| sigma * (-spec.r * (1.0 - gamma) * i as f64 * dt).exp() * dt.sqrt())
                .collect()
        };
        let coef_x = coef(spec.sigma1, spec.gamma1);
        let coef_y = coef(spec.sigma2, spec.gamma2);
        let rho_perp = (1.0 - spec.rho * spec.rho).sqrt();
        let growth = (spec.r * spec.maturity).exp();
        let discount = if spec.discount { 1.0 / growth } else { 1.0 };
        Ok(Self {
            spec,
            dt,
            coef_x,
            coef_y,
            rho_perp,
            growth,
            discount,
        })
    }

    pub fn spec(&self) -> &CevSpec {
        &self.spec
    }

    /// Terminal `(S_T, H_T)`. States that would go negative are set to zero
    /// and stay there, since the diffusion coefficient vanishes at zero.
    pub fn paths(&self, innovations: &[f64]) -> Result<(f64, f64)> {
        check_dim(self.dim(), innovations.len())?;
        Ok(self.paths_unchecked(innovations))
    }

    fn paths_unchecked(&self, innovations: &[f64]) -> (f64, f64) {
        let (g1, g2) = (self.spec.gamma1, self.spec.gamma2);
        let mut x = self.spec.s0;
        let mut y = self.spec.h0;
        for (i, zr) in innovations.chunks_exact(2).enumerate() {
            let (z, r) = (zr[0], zr[1]);
            if x > 0.0 {
                x = (x + self.coef_x[i] * x.powf(g1) * z).max(0.0);
            }
            if y > 0.0 {
                let b = self.spec.rho * z + self.rho_perp * r;
                y = (y + self.coef_y[i] * y.powf(g2) * b).max(0.0);
            }
        }
        (self.growth * x, self.growth * y)
    }

    /// Drift `x` given to `W` so that the moment approximation
    /// `f' = xσe^{−r(1−γ)t}f^γ`, `f(0) = start` ends at `target`.
    fn moment_drift(sigma: f64, gamma: f64, r: f64, t: f64, start: f64, target: f64) -> f64 {
        let p = 1.0 - gamma;
        let lhs = target.powf(p) - start.powf(p);
        if p == 0.0 {
            // γ = 1: log f grows linearly at rate xσ
            return (target / start).ln() / (sigma * t);
        }
        if r == 0.0 {
            lhs / (sigma * p * t)
        } else {
            r / sigma * lhs / (1.0 - (-r * p * t).exp())
        }
    }

    /// Brownian drifts `(x, y)` given to `W` and `B` by the two changes of
    /// measure.
    pub fn init_drifts(&self) -> (f64, f64) {
        let s = &self.spec;
        let t = s.maturity;
        let disc = (-s.r * t).exp();
        let x = Self::moment_drift(s.sigma1, s.gamma1, s.r, t, s.s0, disc * s.strike / s.c1);
        let y = Self::moment_drift(s.sigma2, s.gamma2, s.r, t, s.h0, disc * s.strike / s.c2);
        (x, y)
    }

    /// Mean shifts of the innovation vector for the two components: the
    /// first gives `W` drift `x`, the second gives `B` drift `y` through
    /// the minimum-norm shift along `(ρ, √(1−ρ²))`.
    pub fn init_tilts(&self) -> [TiltParam; 2] {
        let (x, y) = self.init_drifts();
        let sdt = self.dt.sqrt();
        let n = self.spec.steps;
        let mut first = vec![0.0; 2 * n];
        let mut second = vec![0.0; 2 * n];
        for i in 0..n {
            first[2 * i] = x * sdt;
            second[2 * i] = self.spec.rho * y * sdt;
            second[2 * i + 1] = self.rho_perp * y * sdt;
        }
        [TiltParam::new(first), TiltParam::new(second)]
    }
}

impl Model for CevDigital {
    fn name(&self) -> &'static str {
        "cev_digital"
    }

    fn dim(&self) -> usize {
        2 * self.spec.steps
    }

    fn payoff(&self, x: &[f64]) -> f64 {
        let (s, h) = self.paths_unchecked(x);
        if (self.spec.c1 * s).max(self.spec.c2 * h) >= self.spec.strike {
            self.discount
        } else {
            0.0
        }
    }

    fn approx_init(&self) -> Result<MixtureParam> {
        MixtureParam::uniform(self.init_tilts().to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_with_strike(strike: f64) -> CevSpec {
        CevSpec {
            s0: 50.0,
            h0: 48.0,
            sigma1: 0.3,
            sigma2: 0.35,
            gamma1: 0.5,
            gamma2: 0.7,
            rho: 0.3,
            r: 0.03,
            maturity: 1.0,
            strike,
            c1: 1.0,
            c2: 1.0,
            steps: 50,
            discount: true,
        }
    }

    #[test]
    fn zero_innovations_keep_discounted_state() {
        let m = CevDigital::new(spec_with_strike(60.0)).unwrap();
        let (s, h) = m.paths(&vec![0.0; 100]).unwrap();
        let g = 0.03f64.exp();
        assert!((s - 50.0 * g).abs() < 1e-12);
        assert!((h - 48.0 * g).abs() < 1e-12);
        let still = CevDigital::new(CevSpec {
            sigma1: 0.0,
            sigma2: 0.0,
            ..spec_with_strike(60.0)
        })
        .unwrap();
        let (s, h) = still.paths(&vec![1.7; 100]).unwrap();
        assert!((s - 50.0 * g).abs() < 1e-12);
        assert!((h - 48.0 * g).abs() < 1e-12);
        assert!(m.paths(&[0.0; 3]).is_err());
    }

    #[test]
    fn unit_elasticity_matches_gbm_euler() {
        let spec = CevSpec {
            gamma1: 1.0,
            gamma2: 1.0,
            sigma1: 0.2,
            sigma2: 0.25,
            ..spec_with_strike(60.0)
        };
        let m = CevDigital::new(spec.clone()).unwrap();
        let dt = 1.0f64 / 50.0;
        let innov: Vec<f64> = (0..100)
            .map(|i| ((i * 37 % 17) as f64 - 8.0) / 6.0)
            .collect();
        let (mut x, mut y) = (spec.s0, spec.h0);
        for i in 0..50 {
            let (z, r) = (innov[2 * i], innov[2 * i + 1]);
            let b = 0.3 * z + (1.0f64 - 0.09).sqrt() * r;
            x *= 1.0 + 0.2 * dt.sqrt() * z;
            y *= 1.0 + 0.25 * dt.sqrt() * b;
        }
        assert!(x > 0.0 && y > 0.0);
        let (s, h) = m.paths(&innov).unwrap();
        let g = 0.03f64.exp();
        assert!((s - g * x).abs() <= 1e-12 * s);
        assert!((h - g * y).abs() <= 1e-12 * h);
    }

    #[test]
    fn absorbed_state_stays_at_zero() {
        let m = CevDigital::new(CevSpec {
            sigma1: 3.0,
            ..spec_with_strike(60.0)
        })
        .unwrap();
        let mut innov = vec![0.0; 100];
        innov[0] = -50.0;
        for i in 1..50 {
            innov[2 * i] = 5.0;
        }
        let (s, _) = m.paths(&innov).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn digital_payoff_limits() {
        let m = CevDigital::new(spec_with_strike(0.0)).unwrap();
        assert!((m.payoff(&vec![0.3; 100]) - (-0.03f64).exp()).abs() < 1e-15);
        let m = CevDigital::new(spec_with_strike(1e12)).unwrap();
        assert_eq!(m.payoff(&vec![0.3; 100]), 0.0);
        let m = CevDigital::new(CevSpec {
            discount: false,
            ..spec_with_strike(0.0)
        })
        .unwrap();
        assert_eq!(m.payoff(&vec![0.3; 100]), 1.0);
    }

    #[test]
    fn no_tilt_when_target_is_forward() {
        let strike = 50.0 * 0.03f64.exp();
        let m = CevDigital::new(spec_with_strike(strike)).unwrap();
        assert!(m.init_drifts().0.abs() < 1e-12);
    }

    /// RK4 on f' = xσe^{−r(1−γ)t} f^γ.
    fn integrate(x: f64, sigma: f64, gamma: f64, r: f64, t: f64, f0: f64) -> f64 {
        let rhs = |s: f64, f: f64| x * sigma * (-r * (1.0 - gamma) * s).exp() * f.powf(gamma);
        let n = 20_000;
        let h = t / n as f64;
        let mut f = f0;
        for i in 0..n {
            let s = i as f64 * h;
            let k1 = rhs(s, f);
            let k2 = rhs(s + h / 2.0, f + h / 2.0 * k1);
            let k3 = rhs(s + h / 2.0, f + h / 2.0 * k2);
            let k4 = rhs(s + h, f + h * k3);
            f += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        f
    }

    #[test]
    fn drift_closed_form_solves_moment_ode() {
        let m = CevDigital::new(spec_with_strike(55.0)).unwrap();
        let (x, y) = m.init_drifts();
        let direct = 0.03 / 0.3 * ((55.0 * (-0.03f64).exp()).sqrt() - 50.0f64.sqrt())
            / (1.0 - (-0.03f64 * 0.5).exp());
        assert!((x - direct).abs() < 1e-12);
        let target = 55.0 * (-0.03f64).exp();
        let fx = integrate(x, 0.3, 0.5, 0.03, 1.0, 50.0);
        assert!((fx - target).abs() <= 1e-6 * target);
        let fy = integrate(y, 0.35, 0.7, 0.03, 1.0, 48.0);
        assert!((fy - target).abs() <= 1e-6 * target);
    }

    #[test]
    fn tilt_layout() {
        let m = CevDigital::new(spec_with_strike(65.0)).unwrap();
        let (x, y) = m.init_drifts();
        let [a, b] = m.init_tilts();
        let sdt = (1.0f64 / 50.0).sqrt();
        for i in 0..50 {
            assert!((a.alpha[2 * i] - x * sdt).abs() < 1e-15);
            assert_eq!(a.alpha[2 * i + 1], 0.0);
            // W picks up ρy, B picks up y
            let b_shift = 0.3 * b.alpha[2 * i] + (1.0f64 - 0.09).sqrt() * b.alpha[2 * i + 1];
            assert!((b.alpha[2 * i] - 0.3 * y * sdt).abs() < 1e-15);
            assert!((b_shift - y * sdt).abs() < 1e-14);
        }
        let uncorrelated = CevDigital::new(CevSpec {
            rho: 0.0,
            ..spec_with_strike(65.0)
        })
        .unwrap();
        let [_, b] = uncorrelated.init_tilts();
        assert!((0..50).all(|i| b.alpha[2 * i] == 0.0 && b.alpha[2 * i + 1] != 0.0));
    }
}
