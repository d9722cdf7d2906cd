use serde::{Deserialize, Serialize};

use super::rng::Rng;
use super::scalar::{sum, Scalar};

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Diagonal Gaussian over a `C`-dimensional action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianHead {
    pub mean: Vec<f64>,
    pub log_std: Vec<f64>,
}

impl GaussianHead {
    /// Builds a head, clamping `log_std` into `[LOG_STD_MIN, LOG_STD_MAX]`.
    pub fn new(mean: Vec<f64>, log_std: Vec<f64>) -> Self {
        assert_eq!(mean.len(), log_std.len(), "mean and log_std lengths differ");
        let log_std = log_std
            .into_iter()
            .map(|s| s.clamp(LOG_STD_MIN, LOG_STD_MAX))
            .collect();
        GaussianHead { mean, log_std }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `mean + exp(log_std) ⊙ eps` together with its log density.
    pub fn sample_with_noise(&self, eps: &[f64]) -> (Vec<f64>, f64) {
        let c: Vec<f64> = self
            .mean
            .iter()
            .zip(&self.log_std)
            .zip(eps)
            .map(|((m, s), e)| m + s.exp() * e)
            .collect();
        let lp = self.log_prob(&c);
        (c, lp)
    }

    /// Reparameterized draw `c = mean + σ ⊙ ε`, `ε ~ N(0, I)`.
    pub fn reparam_sample(&self, rng: &mut Rng) -> (Vec<f64>, f64) {
        let eps = rng.normals(self.dim());
        self.sample_with_noise(&eps)
    }

    pub fn log_prob(&self, x: &[f64]) -> f64 {
        diag_gaussian_log_prob(x, &self.mean, &self.log_std)
    }
}

/// Log density of `x` under `N(mean, diag(exp(log_std))²)`, with `log_std`
/// clamped to the head's admissible range.
pub fn diag_gaussian_log_prob<S: Scalar>(x: &[S], mean: &[S], log_std: &[S]) -> S {
    debug_assert_eq!(x.len(), mean.len());
    sum(x.iter().zip(mean).zip(log_std).map(|((&xi, &mi), &si)| {
        let s = si.clamp(LOG_STD_MIN, LOG_STD_MAX);
        let z = (xi - mi) / s.exp();
        -(z.square() * 0.5) - s - HALF_LN_2PI
    }))
}
