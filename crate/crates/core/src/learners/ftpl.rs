use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Follow-the-perturbed-leader oracle settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FtplConfig {
    /// Rate ζ of the exponential perturbation `σ ~ Exp(ζ)`.
    pub zeta: f64,
    /// Half-width `B` of the strategy box `[−B, B]^d`.
    pub bound: f64,
    /// Projected gradient steps `m` per round.
    pub inner_steps: usize,
    pub inner_lr: f64,
    /// Give each coordinate of σ an independent random sign.
    pub symmetric: bool,
}

impl Default for FtplConfig {
    fn default() -> Self {
        FtplConfig {
            zeta: 1.0,
            bound: 1.0,
            inner_steps: 50,
            inner_lr: 0.4,
            symmetric: true,
        }
    }
}

impl FtplConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.zeta > 0.0) {
            return Err(Error::config("ftpl zeta must be positive"));
        }
        if !(self.bound > 0.0) {
            return Err(Error::config("ftpl bound must be positive"));
        }
        if !(self.inner_lr > 0.0) {
            return Err(Error::config("ftpl inner_lr must be positive"));
        }
        Ok(())
    }

    /// Fresh perturbation vector for one round.
    pub fn draw_perturbation(&self, dim: usize, rng: &mut Rng) -> Result<Vec<f64>> {
        (0..dim)
            .map(|_| {
                let s = rng.exponential(self.zeta)?;
                Ok(if self.symmetric && rng.coin() { -s } else { s })
            })
            .collect()
    }
}

/// A player's cumulative past loss `Σ_{i<t} L_i(θ)` as a function of its
/// own strategy.
pub trait CumulativeLoss {
    fn dim(&self) -> usize;
    /// A (sub)gradient of the cumulative loss at `theta`.
    fn gradient(&self, theta: &[f64]) -> Vec<f64>;
}

/// Approximate `argmin_{θ ∈ [−B,B]^d} Σ_{i<t} L_i(θ) + σᵀθ` by `m` projected
/// steepest-descent steps in the box's own (ℓ∞) geometry, warm-started at
/// `theta_prev`.
///
/// Step `j` moves every coordinate by `γ_j = inner_lr·(m − j)/m` against the
/// sign of its (sub)gradient. The cumulative objective grows with the
/// number of rounds while the perturbation does not, so the steps ignore
/// gradient magnitude; their total length `inner_lr·(m + 1)/2` should cover
/// the box width `2B`, and the shrinking tail settles on kinks.
pub fn ftpl_step(history: &dyn CumulativeLoss, theta_prev: &[f64], sigma: &[f64], cfg: &FtplConfig) -> Vec<f64> {
    debug_assert_eq!(theta_prev.len(), history.dim());
    debug_assert_eq!(sigma.len(), history.dim());
    let b = cfg.bound;
    let m = cfg.inner_steps as f64;
    let mut theta: Vec<f64> = theta_prev.iter().map(|x| x.clamp(-b, b)).collect();
    for j in 0..cfg.inner_steps {
        let gamma = cfg.inner_lr * (m - j as f64) / m;
        let g = history.gradient(&theta);
        for ((t, gi), si) in theta.iter_mut().zip(&g).zip(sigma) {
            let d = gi + si;
            if d != 0.0 {
                *t = (*t - gamma * d.signum()).clamp(-b, b);
            }
        }
    }
    theta
}
