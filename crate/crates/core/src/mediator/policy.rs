use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::numerics::{GaussianPolicy, Rng};

/// Observable game information `I` fed to the mediator, flattened.
#[derive(Clone, Debug, PartialEq)]
pub struct MediatorInfo(pub Vec<f64>);

impl MediatorInfo {
    pub fn concat(parts: &[&[f64]]) -> Self {
        MediatorInfo(parts.iter().flat_map(|p| p.iter().copied()).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Whether codes are the head mean or a random draw from the head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeMode {
    Mean,
    Sample,
}

/// Stochastic mediator `M_ψ`: a tanh network mapping `I` to the code mean,
/// with a learned state-independent `log_std`.
pub type MediatorPolicy = GaussianPolicy;

/// `c = M_ψ(I)` together with its log density under the current head.
pub fn emit_code(policy: &MediatorPolicy, info: &MediatorInfo, mode: CodeMode, rng: &mut Rng) -> Result<(Vec<f64>, f64)> {
    let head = policy.head(&info.0)?;
    Ok(match mode {
        CodeMode::Mean => {
            let lp = head.log_prob(&head.mean);
            (head.mean, lp)
        }
        CodeMode::Sample => head.reparam_sample(rng),
    })
}

/// A code the mediator could have emitted and the reward it would earn.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreSample {
    pub code: Vec<f64>,
    pub reward: f64,
}

/// Score-function ascent on `Ê[(r_m − b)·log M_ψ(c | I)]`:
/// `ψ ← ψ + η_m · mean_s (r_s − b)·∇_ψ log M_ψ(c_s | I)`.
pub fn mediator_update(
    policy: &mut MediatorPolicy,
    info: &MediatorInfo,
    samples: &[ScoreSample],
    baseline: f64,
    eta_m: f64,
) -> Result<()> {
    if samples.is_empty() || eta_m == 0.0 {
        return Ok(());
    }
    let mut direction = vec![0.0; policy.num_params()];
    for s in samples {
        let adv = s.reward - baseline;
        if !adv.is_finite() {
            return Err(Error::numeric("mediator_update", "non-finite advantage"));
        }
        if adv == 0.0 {
            continue;
        }
        let g = policy.log_prob_gradient(&info.0, &s.code)?;
        for (d, gi) in direction.iter_mut().zip(&g) {
            *d += adv * gi;
        }
    }
    let scale = eta_m / samples.len() as f64;
    policy.add_scaled(&direction, scale);
    ensure_finite("mediator_update", &policy.params())
}

/// Exponential running mean and spread of the mediator's rewards.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardBaseline {
    value: Option<f64>,
    var: f64,
    rate: f64,
}

impl RewardBaseline {
    pub fn new(rate: f64) -> Self {
        RewardBaseline {
            value: None,
            var: 0.0,
            rate,
        }
    }

    /// Current estimate; zero before the first observation.
    pub fn value(&self) -> f64 {
        self.value.unwrap_or(0.0)
    }

    /// Running standard deviation of the rewards around the baseline.
    pub fn spread(&self) -> f64 {
        self.var.sqrt()
    }

    pub fn observe(&mut self, r: f64) {
        match self.value {
            None => self.value = Some(r),
            Some(v) => {
                let d = r - v;
                self.value = Some(v + self.rate * d);
                self.var = (1.0 - self.rate) * (self.var + self.rate * d * d);
            }
        }
    }
}
