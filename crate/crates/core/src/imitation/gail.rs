use std::io::Write;

use serde::{Deserialize, Serialize};

use super::env::{unit, CircleWorld, CircleWorldConfig, ACTION_DIM, OBS_DIM};
use super::expert::{expert_generate, ExpertMode, Trajectory};
use super::rollout::{correlated_rollout, mediator_input, relabel_codes, PolicyNet, Rollout};
use super::update::{policy_update, SurrogateConfig};
use crate::error::{ensure_finite, Error, Result};
use crate::experiment::FtnplConfig;
use crate::learners::HistoryQueue;
use crate::mediator::{marginal_gains, mediator_reward, CodeMode, RewardBaseline};
use crate::numerics::{Activation, Adam, GaussianPolicy, MlpParams, MlpShape, Rng, Scalar};

/// Mediator rewards are only rescaled once their spread exceeds this.
const MIN_SPREAD: f64 = 1.0;

/// Discriminator `d(s, a, c)`: a tanh network on `[s; a/‖a‖; c]` with a
/// scalar score.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscNet {
    pub params: MlpParams,
}

impl DiscNet {
    pub const HIDDEN: [usize; 2] = [32, 32];

    pub fn new(code_size: usize, rng: &mut Rng) -> Result<Self> {
        let shape = MlpShape::uniform(OBS_DIM + ACTION_DIM + code_size, &Self::HIDDEN, 1, Activation::Tanh)?;
        Ok(DiscNet {
            params: MlpParams::init(shape, 1.0, rng),
        })
    }

    pub fn shape(&self) -> &MlpShape {
        self.params.shape()
    }

    pub fn score(&self, input: &[f64]) -> Result<f64> {
        Ok(self.params.forward(input)?[0])
    }

    pub fn mean_score(&self, batch: &[Vec<f64>]) -> Result<f64> {
        mean_score(self.shape(), self.params.flat(), batch)
    }
}

fn mean_score<S: Scalar>(shape: &MlpShape, params: &[S], batch: &[Vec<f64>]) -> Result<S> {
    if batch.is_empty() {
        return Err(Error::config("discriminator batch is empty"));
    }
    let zero = params[0].lift(0.0);
    let mut total = zero;
    for x in batch {
        let x: Vec<S> = x.iter().map(|v| zero.lift(*v)).collect();
        total = total + shape.forward(params, &x)?[0];
    }
    Ok(total / batch.len() as f64)
}

/// `[s; a/‖a‖; c]`.
pub fn disc_input(state: &[f64], action: &[f64], code: &[f64]) -> Result<Vec<f64>> {
    let a = unit(action)?;
    Ok(state.iter().chain(&a).chain(code).copied().collect())
}

/// Discriminator inputs of every step of every trajectory.
pub fn disc_batch<'a>(trajectories: impl IntoIterator<Item = &'a Trajectory>) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for tr in trajectories {
        for t in 0..tr.len() {
            out.push(disc_input(&tr.states[t], &tr.actions[t], &tr.codes[t])?);
        }
    }
    Ok(out)
}

/// `mean d(policy) − mean d(expert)`, the loss the discriminator descends.
pub fn gail_disc_loss<S: Scalar>(shape: &MlpShape, disc: &[S], expert: &[Vec<f64>], policy: &[Vec<f64>]) -> Result<S> {
    Ok(mean_score(shape, disc, policy)? - mean_score(shape, disc, expert)?)
}

/// `∇_θ Σ_x w_x d_θ(x)`.
fn weighted_score_gradient(shape: &MlpShape, params: &[f64], weighted: &[(&[f64], f64)]) -> Result<Vec<f64>> {
    let mut g = vec![0.0; params.len()];
    for (x, w) in weighted {
        shape.backward(params, x, &[*w], &mut g)?;
    }
    ensure_finite("gail_disc_loss", &g)?;
    Ok(g)
}

/// `∇_θ Σ_{P ∈ queue} gail_disc_loss(θ, expert, P)`.
pub fn disc_queue_gradient(
    shape: &MlpShape,
    params: &[f64],
    expert: &[Vec<f64>],
    policy_batches: &HistoryQueue<Vec<Vec<f64>>>,
) -> Result<Vec<f64>> {
    if policy_batches.is_empty() {
        return Err(Error::precondition("follow-the-leader step needs a nonempty opponent queue"));
    }
    if expert.is_empty() || policy_batches.iter().any(Vec::is_empty) {
        return Err(Error::config("discriminator batch is empty"));
    }
    let we = -(policy_batches.len() as f64) / expert.len() as f64;
    let mut weighted: Vec<(&[f64], f64)> = expert.iter().map(|x| (x.as_slice(), we)).collect();
    for batch in policy_batches.iter() {
        let wp = 1.0 / batch.len() as f64;
        weighted.extend(batch.iter().map(|x| (x.as_slice(), wp)));
    }
    weighted_score_gradient(shape, params, &weighted)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GailConfig {
    pub env: CircleWorldConfig,
    /// The demonstrated mode.
    pub mode: ExpertMode,
    pub ftnpl: FtnplConfig,
    /// Policy rollouts per iteration.
    pub episodes: usize,
    /// Expert demonstrations, generated once.
    pub expert_episodes: usize,
    pub disc_lr: f64,
    pub surrogate: SurrogateConfig,
    pub policy_log_std: f64,
}

impl Default for GailConfig {
    fn default() -> Self {
        GailConfig {
            env: CircleWorldConfig::default(),
            mode: ExpertMode::default(),
            ftnpl: FtnplConfig::default(),
            episodes: 4,
            expert_episodes: 8,
            disc_lr: 3e-3,
            surrogate: SurrogateConfig {
                lr: 3e-3,
                ..Default::default()
            },
            policy_log_std: -0.5,
        }
    }
}

impl GailConfig {
    pub fn validate(&self) -> Result<()> {
        self.ftnpl.validate()?;
        if self.episodes == 0 || self.expert_episodes == 0 {
            return Err(Error::usage("episodes", "at least one policy and one expert episode are required"));
        }
        if self.env.episode_len == 0 {
            return Err(Error::usage("episode_len", "must be at least 1"));
        }
        if !(self.disc_lr > 0.0) {
            return Err(Error::usage("disc_lr", "must be positive"));
        }
        Ok(())
    }
}

/// Networks, queues and demonstrations of an FTNPL-GAIL run.
#[derive(Clone, Debug)]
pub struct GailState {
    pub config: GailConfig,
    pub policy: PolicyNet,
    pub policy_opt: Adam,
    pub mediator: GaussianPolicy,
    pub baseline: RewardBaseline,
    pub disc: DiscNet,
    pub disc_opt: Adam,
    /// Discriminator inputs of past policies' rollouts.
    pub h_pi: HistoryQueue<Vec<Vec<f64>>>,
    /// Past discriminator parameters.
    pub h_d: HistoryQueue<Vec<f64>>,
    pub expert: Vec<Trajectory>,
    env: CircleWorld,
}

/// Diagnostics of one iteration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GailStats {
    pub t: u64,
    /// `|mean d(policy) − mean d(expert)|` before the discriminator moves.
    pub score_gap: f64,
    pub mean_radius: f64,
    pub r_m: f64,
    pub loss_d: f64,
}

impl GailState {
    pub fn new(config: GailConfig, rng: &mut Rng) -> Result<Self> {
        config.validate()?;
        let c = config.ftnpl.code_size;
        let mut init = rng.split();
        let policy = PolicyNet::new(OBS_DIM + c, ACTION_DIM, 0.0, config.policy_log_std, &mut init)?;
        let mediator = GaussianPolicy::new(
            OBS_DIM + ACTION_DIM,
            c,
            config.ftnpl.init_code_mean,
            config.ftnpl.init_log_std,
            &mut init,
        )?;
        let disc = DiscNet::new(c, &mut init)?;
        let expert = (0..config.expert_episodes)
            .map(|_| expert_generate(&config.mode, &config.env, c, config.env.episode_len, &mut init))
            .collect::<Result<Vec<_>>>()?;
        Ok(GailState {
            policy_opt: Adam::new(policy.num_params(), config.surrogate.lr),
            policy,
            mediator,
            baseline: RewardBaseline::new(config.ftnpl.baseline_rate),
            disc_opt: Adam::new(disc.params.len(), config.disc_lr),
            disc,
            h_pi: HistoryQueue::new(config.ftnpl.k),
            h_d: HistoryQueue::new(config.ftnpl.k),
            expert,
            env: CircleWorld::new(config.env.clone())?,
            config,
        })
    }

    fn code_mode(&self) -> CodeMode {
        self.config.ftnpl.code_mode.unwrap_or(CodeMode::Sample)
    }

    /// Rollouts of the current policy, each starting on the expert's circle.
    pub fn rollouts(&mut self, episodes: usize, rng: &mut Rng) -> Result<Vec<Rollout>> {
        let mode = self.code_mode();
        (0..episodes)
            .map(|_| {
                self.env.reset_on_circle(self.config.mode.radius, rng);
                correlated_rollout(&self.policy, &self.mediator, mode, &mut self.env, self.config.env.episode_len, rng)
            })
            .collect()
    }

    /// Queue loss vectors of the current queues against `expert`:
    /// `u_π[i] = Σ_j V(P_i, d_j)`, `u_D[j] = −Σ_i V(P_i, d_j)` with
    /// `V(P, d) = mean d(expert) − mean d(P)`.
    fn queue_losses(&self, expert: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
        let shape = self.disc.shape();
        let expert_scores = self
            .h_d
            .iter()
            .map(|d| mean_score(shape, d, expert))
            .collect::<Result<Vec<f64>>>()?;
        let table = self
            .h_pi
            .iter()
            .map(|p| {
                self.h_d
                    .iter()
                    .zip(&expert_scores)
                    .map(|(d, e)| Ok(e - mean_score(shape, d, p)?))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let u_pi = table.iter().map(|row| row.iter().sum()).collect();
        let u_d = (0..self.h_d.len()).map(|j| -table.iter().map(|row| row[j]).sum::<f64>()).collect();
        Ok((u_pi, u_d))
    }

    /// Score-function step on `Σ_t log M(c_t | s_t, a_{t−1})` over the codes
    /// the mediator emitted during `rollouts`.
    fn mediator_step(&mut self, rollouts: &[Rollout], r_m: f64) -> Result<()> {
        let lr = self.config.ftnpl.mediator_lr;
        let scale = self.baseline.spread().max(MIN_SPREAD);
        let adv = (r_m - self.baseline.value()) / scale;
        self.baseline.observe(r_m);
        if lr == 0.0 || adv == 0.0 || self.config.ftnpl.disable_mediator {
            return Ok(());
        }
        if !adv.is_finite() {
            return Err(Error::numeric("mediator_update", "non-finite advantage"));
        }
        let mut direction = vec![0.0; self.mediator.num_params()];
        let mut n = 0usize;
        for r in rollouts {
            let tr = &r.trajectory;
            for t in 1..tr.len() {
                let info = mediator_input(&tr.states[t], &tr.actions[t - 1]);
                let g = self.mediator.log_prob_gradient(&info, &tr.codes[t])?;
                for (d, gi) in direction.iter_mut().zip(&g) {
                    *d += gi;
                }
                n += 1;
            }
        }
        if n > 0 {
            self.mediator.add_scaled(&direction, lr * adv / n as f64);
        }
        ensure_finite("mediator_update", &self.mediator.params())
    }
}

/// One outer FTNPL-GAIL step: rollouts, queue insertions, discriminator
/// queue step, policy update on the summed queued scores, and the mediator
/// update from the queue loss vectors.
pub fn ftnpl_gail_iteration(state: &mut GailState, t: u64, rng: &mut Rng) -> Result<GailStats> {
    let mode = state.code_mode();
    let expert_tr = state
        .expert
        .iter()
        .map(|tr| relabel_codes(tr, &state.mediator, mode, rng))
        .collect::<Result<Vec<_>>>()?;
    let expert = disc_batch(&expert_tr)?;
    let rollouts = state.rollouts(state.config.episodes, rng)?;
    let policy_batch = disc_batch(rollouts.iter().map(|r| &r.trajectory))?;

    let loss_d = gail_disc_loss(state.disc.shape(), state.disc.params.flat(), &expert, &policy_batch)?;
    let mean_radius = rollouts.iter().map(|r| r.trajectory.mean_radius()).sum::<f64>() / rollouts.len() as f64;

    state.h_pi.push(policy_batch);
    state.h_d.push(state.disc.params.flat().to_vec());

    let (u_pi, u_d) = state.queue_losses(&expert)?;
    let r_m = mediator_reward(&marginal_gains(&u_pi, &u_d)?, state.config.ftnpl.penalty);

    let g = disc_queue_gradient(state.disc.shape(), state.disc.params.flat(), &expert, &state.h_pi)?;
    let step = state.disc_opt.step(&g);
    state.disc.params.add_scaled(&step, -1.0);
    ensure_finite("ftl_queue_step", state.disc.params.flat())?;

    let shape = state.disc.shape().clone();
    let rewards = rollouts
        .iter()
        .map(|r| {
            let tr = &r.trajectory;
            (0..tr.len())
                .map(|i| {
                    let x = disc_input(&tr.states[i], &tr.actions[i], &tr.codes[i])?;
                    state.h_d.iter().try_fold(0.0, |acc, d| Ok(acc + shape.forward(d, &x)?[0]))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    policy_update(&mut state.policy, &mut state.policy_opt, &rollouts, &rewards, &state.config.surrogate, rng)?;
    state.mediator_step(&rollouts, r_m)?;

    Ok(GailStats {
        t,
        score_gap: loss_d.abs(),
        mean_radius,
        r_m,
        loss_d,
    })
}

/// Result of an FTNPL-GAIL run.
#[derive(Clone, Debug)]
pub struct GailOutcome {
    pub stats: Vec<GailStats>,
    pub expert: Vec<Trajectory>,
    /// Rollouts of the final policy.
    pub learned: Vec<Trajectory>,
}

impl GailOutcome {
    pub fn score_gaps(&self) -> Vec<f64> {
        self.stats.iter().map(|s| s.score_gap).collect()
    }

    pub fn learned_radius(&self) -> f64 {
        if self.learned.is_empty() {
            return 0.0;
        }
        self.learned.iter().map(Trajectory::mean_radius).sum::<f64>() / self.learned.len() as f64
    }

    /// `t,score_gap,mean_radius,r_m,loss_D` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "score_gap", "mean_radius", "r_m", "loss_D"])?;
        for s in &self.stats {
            w.write_record([
                s.t.to_string(),
                s.score_gap.to_string(),
                s.mean_radius.to_string(),
                s.r_m.to_string(),
                s.loss_d.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn run_circleworld(config: &GailConfig, iterations: usize, rng: &mut Rng) -> Result<GailOutcome> {
    let mut state = GailState::new(config.clone(), rng)?;
    let stats = (0..iterations as u64)
        .map(|t| ftnpl_gail_iteration(&mut state, t, rng))
        .collect::<Result<Vec<_>>>()?;
    let learned = state
        .rollouts(config.episodes, rng)?
        .into_iter()
        .map(|r| r.trajectory)
        .collect();
    Ok(GailOutcome {
        stats,
        expert: state.expert,
        learned,
    })
}
