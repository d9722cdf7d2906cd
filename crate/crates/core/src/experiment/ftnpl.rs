use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mediator::{
    marginal_gains, mediator_reward, mediator_update, CodeMode, MediatorInfo, MediatorPolicy, Penalty,
    RewardBaseline, ScoreSample,
};
use crate::numerics::Rng;

/// Settings of the mediator and queues shared by every FTNPL experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FtnplConfig {
    /// Queue size `K`.
    pub k: usize,
    /// Code size `C`.
    pub code_size: usize,
    /// `None` picks the experiment's default.
    pub code_mode: Option<CodeMode>,
    pub penalty: Penalty,
    pub mediator_lr: f64,
    /// Codes drawn per round for the score-function estimate.
    pub mediator_samples: usize,
    /// Rate of the exponential running mean used as reward baseline.
    pub baseline_rate: f64,
    /// Initial code mean (the bias of the mediator's output layer).
    pub init_code_mean: f64,
    pub init_log_std: f64,
    /// Play the zero code and never train the mediator.
    pub disable_mediator: bool,
}

impl Default for FtnplConfig {
    fn default() -> Self {
        FtnplConfig {
            k: 5,
            code_size: 2,
            code_mode: None,
            penalty: Penalty::Squared,
            mediator_lr: 1e-3,
            mediator_samples: 4,
            baseline_rate: 0.01,
            init_code_mean: 1.0,
            init_log_std: 0.0,
            disable_mediator: false,
        }
    }
}

impl FtnplConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::usage("k", "queue size must be at least 1"));
        }
        if self.code_size == 0 {
            return Err(Error::usage("code_size", "code size must be at least 1"));
        }
        if !(self.mediator_lr >= 0.0) {
            return Err(Error::usage("mediator_lr", "must be nonnegative"));
        }
        if self.mediator_samples == 0 {
            return Err(Error::usage("mediator_samples", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.baseline_rate) {
            return Err(Error::usage("baseline_rate", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Rewards are only rescaled once their spread exceeds this.
const MIN_SPREAD: f64 = 1.0;

/// The mediator half of one FTNPL round: picks a code, and afterwards
/// learns from the rewards of a few alternative codes.
#[derive(Clone, Debug)]
pub struct Mediator {
    pub policy: MediatorPolicy,
    pub baseline: RewardBaseline,
    pub mode: CodeMode,
    pub penalty: Penalty,
    pub lr: f64,
    pub samples: usize,
    pub disabled: bool,
}

impl Mediator {
    pub fn new(cfg: &FtnplConfig, mode: CodeMode, info_dim: usize, rng: &mut Rng) -> Result<Self> {
        Ok(Mediator {
            policy: MediatorPolicy::new(info_dim, cfg.code_size, cfg.init_code_mean, cfg.init_log_std, rng)?,
            baseline: RewardBaseline::new(cfg.baseline_rate),
            mode,
            penalty: cfg.penalty,
            lr: cfg.mediator_lr,
            samples: cfg.mediator_samples,
            disabled: cfg.disable_mediator,
        })
    }

    /// The code played this round.
    pub fn code(&self, info: &MediatorInfo, rng: &mut Rng) -> Result<Vec<f64>> {
        if self.disabled {
            return Ok(vec![0.0; self.policy.output_dim()]);
        }
        Ok(crate::mediator::emit_code(&self.policy, info, self.mode, rng)?.0)
    }

    /// `r_m` of the queue loss vectors produced by `losses(code)`.
    pub fn reward<F>(&self, code: &[f64], losses: &mut F) -> Result<f64>
    where
        F: FnMut(&[f64]) -> Result<(Vec<f64>, Vec<f64>)>,
    {
        let (u_pi, u_d) = losses(code)?;
        Ok(mediator_reward(&marginal_gains(&u_pi, &u_d)?, self.penalty))
    }

    /// Score-function update from the played code (sample mode) plus fresh
    /// draws from the head. Returns the mean reward of the draws.
    pub fn learn<F>(&mut self, info: &MediatorInfo, played: &[f64], played_reward: f64, rng: &mut Rng, mut losses: F) -> Result<f64>
    where
        F: FnMut(&[f64]) -> Result<(Vec<f64>, Vec<f64>)>,
    {
        if self.disabled {
            return Ok(played_reward);
        }
        let head = self.policy.head(&info.0)?;
        let mut samples = Vec::with_capacity(self.samples);
        if self.mode == CodeMode::Sample {
            samples.push(ScoreSample {
                code: played.to_vec(),
                reward: played_reward,
            });
        }
        while samples.len() < self.samples {
            let (code, _) = head.reparam_sample(rng);
            let reward = self.reward(&code, &mut losses)?;
            samples.push(ScoreSample { code, reward });
        }
        let mean = samples.iter().map(|s| s.reward).sum::<f64>() / samples.len() as f64;
        let b = self.baseline.value();
        let scale = self.baseline.spread().max(MIN_SPREAD);
        let scaled: Vec<ScoreSample> = samples
            .iter()
            .map(|s| ScoreSample {
                code: s.code.clone(),
                reward: s.reward / scale,
            })
            .collect();
        mediator_update(&mut self.policy, info, &scaled, b / scale, self.lr)?;
        for s in &samples {
            self.baseline.observe(s.reward);
        }
        Ok(mean)
    }
}
