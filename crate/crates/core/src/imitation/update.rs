use serde::{Deserialize, Serialize};

use super::rollout::{policy_input, PolicyNet, Rollout};
use crate::error::{ensure_finite, Error, Result};
use crate::numerics::{Adam, Rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateConfig {
    /// Ratio clip `ε`.
    pub clip: f64,
    /// Discount `γ`.
    pub gamma: f64,
    /// Adam step size.
    pub lr: f64,
    pub minibatch: usize,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig {
            clip: 0.2,
            gamma: 0.99,
            lr: 1e-2,
            minibatch: 100,
        }
    }
}

/// Discounted reward-to-go `G_t = Σ_{k≥t} γ^{k−t} r_k`.
pub fn reward_to_go(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for (o, r) in out.iter_mut().zip(rewards).rev() {
        acc = r + gamma * acc;
        *o = acc;
    }
    out
}

/// Reward-to-go minus its mean across the rollouts at the same time step,
/// divided by the spread of the result. Returns that differ only by rounding
/// give zero advantages.
pub fn advantages(rewards: &[Vec<f64>], gamma: f64) -> Result<Vec<Vec<f64>>> {
    let mut adv: Vec<Vec<f64>> = rewards.iter().map(|r| reward_to_go(r, gamma)).collect();
    let horizon = adv.iter().map(Vec::len).max().unwrap_or(0);
    for t in 0..horizon {
        let at_t: Vec<f64> = adv.iter().filter_map(|g| g.get(t).copied()).collect();
        let mean = at_t.iter().sum::<f64>() / at_t.len() as f64;
        let tol = 1e-12 * (1.0 + mean.abs());
        for g in adv.iter_mut().filter(|g| g.len() > t) {
            g[t] -= mean;
            if g[t].abs() <= tol {
                g[t] = 0.0;
            }
        }
    }
    let n = adv.iter().map(Vec::len).sum::<usize>();
    let std = (adv.iter().flatten().map(|a| a * a).sum::<f64>() / n.max(1) as f64).sqrt();
    if std > 0.0 {
        adv.iter_mut().flatten().for_each(|a| *a /= std);
    }
    for a in &adv {
        ensure_finite("policy_update", a).map_err(|_| Error::numeric("policy_update", "non-finite advantage"))?;
    }
    Ok(adv)
}

/// One sample of the surrogate objective.
#[derive(Clone, Debug, PartialEq)]
pub struct SurrogateSample {
    pub input: Vec<f64>,
    pub action: Vec<f64>,
    pub old_log_prob: f64,
    pub advantage: f64,
}

/// Gradient of `mean min(ρ·A, clip(ρ, 1−ε, 1+ε)·A)` with
/// `ρ = π(a|x) / π_old(a|x)`. Samples whose clipped branch is active add
/// nothing.
pub fn surrogate_gradient(policy: &PolicyNet, samples: &[SurrogateSample], clip: f64) -> Result<Vec<f64>> {
    let mut g = vec![0.0; policy.num_params()];
    if samples.is_empty() {
        return Ok(g);
    }
    for s in samples {
        if s.advantage == 0.0 {
            continue;
        }
        let ratio = (policy.head(&s.input)?.log_prob(&s.action) - s.old_log_prob).exp();
        let clipped = (s.advantage > 0.0 && ratio > 1.0 + clip) || (s.advantage < 0.0 && ratio < 1.0 - clip);
        if clipped {
            continue;
        }
        let lg = policy.log_prob_gradient(&s.input, &s.action)?;
        let w = s.advantage * ratio;
        for (gi, l) in g.iter_mut().zip(&lg) {
            *gi += w * l;
        }
    }
    let n = samples.len() as f64;
    g.iter_mut().for_each(|gi| *gi /= n);
    ensure_finite("policy_update", &g)?;
    Ok(g)
}

/// One epoch of clipped-surrogate ascent over shuffled minibatches, each
/// minibatch taking one Adam step.
pub fn policy_update(
    policy: &mut PolicyNet,
    optimizer: &mut Adam,
    rollouts: &[Rollout],
    rewards: &[Vec<f64>],
    cfg: &SurrogateConfig,
    rng: &mut Rng,
) -> Result<()> {
    if rollouts.is_empty() {
        return Err(Error::config("policy update needs at least one rollout"));
    }
    if rewards.len() != rollouts.len() || rollouts.iter().zip(rewards).any(|(r, w)| w.len() != r.trajectory.len()) {
        return Err(Error::config("one reward per rollout step is required"));
    }
    if cfg.minibatch == 0 {
        return Err(Error::usage("minibatch", "must be at least 1"));
    }
    let adv = advantages(rewards, cfg.gamma)?;
    let mut samples: Vec<SurrogateSample> = rollouts
        .iter()
        .zip(&adv)
        .flat_map(|(r, a)| {
            let tr = &r.trajectory;
            (0..tr.len()).map(move |t| SurrogateSample {
                input: policy_input(&tr.states[t], &tr.codes[t]),
                action: tr.actions[t].clone(),
                old_log_prob: r.log_probs[t],
                advantage: a[t],
            })
        })
        .collect();
    rng.shuffle(&mut samples);
    for batch in samples.chunks(cfg.minibatch) {
        let g = surrogate_gradient(policy, batch, cfg.clip)?;
        if g.iter().all(|x| *x == 0.0) {
            continue;
        }
        policy.add_scaled(&optimizer.step(&g), 1.0);
    }
    ensure_finite("policy_update", &policy.params())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imitation::expert::Trajectory;

    #[test]
    fn reward_to_go_discounts() {
        let g = reward_to_go(&[1.0, 2.0, 3.0], 0.5);
        assert_eq!(g, vec![1.0 + 0.5 * 2.0 + 0.25 * 3.0, 2.0 + 1.5, 3.0]);
    }

    #[test]
    fn advantages_are_centred_per_time_step() {
        let adv = advantages(&[vec![1.0, 1.0], vec![3.0, 1.0], vec![2.0]], 1.0).unwrap();
        // returns: [2, 1], [4, 1], [2]; step means 8/3 and 1
        let raw: [[f64; 2]; 2] = [[2.0 - 8.0 / 3.0, 0.0], [4.0 - 8.0 / 3.0, 0.0]];
        let std = ((raw[0][0].powi(2) + raw[1][0].powi(2) + (2.0f64 - 8.0 / 3.0).powi(2)) / 5.0).sqrt();
        assert!((adv[0][0] - raw[0][0] / std).abs() < 1e-12);
        assert!((adv[1][0] - raw[1][0] / std).abs() < 1e-12);
        assert_eq!(adv[0][1], 0.0);
        assert_eq!(adv[2].len(), 1);
    }

    fn bandit_rollouts(policy: &PolicyNet, n: usize, rng: &mut Rng) -> (Vec<Rollout>, Vec<Vec<f64>>) {
        let mut rollouts = Vec::new();
        let mut rewards = Vec::new();
        for _ in 0..n {
            let head = policy.head(&[1.0]).unwrap();
            let (a, lp) = head.reparam_sample(rng);
            let r = if a[0] > 0.0 { 1.0 } else { 0.0 };
            rollouts.push(Rollout {
                trajectory: Trajectory {
                    states: vec![vec![1.0]],
                    actions: vec![a],
                    codes: vec![vec![]],
                    rewards: vec![r],
                    positions: vec![[0.0, 0.0]],
                },
                log_probs: vec![lp],
            });
            rewards.push(vec![r]);
        }
        (rollouts, rewards)
    }

    #[test]
    fn zero_advantages_leave_the_policy_unchanged() {
        let mut rng = Rng::new(0);
        let mut policy = PolicyNet::new(1, 2, 0.0, 0.0, &mut rng).unwrap();
        let before = policy.clone();
        let (rollouts, _) = bandit_rollouts(&policy, 10, &mut rng);
        let flat = vec![vec![0.7]; 10];
        policy_update(&mut policy, &mut Adam::new(before.num_params(), 1e-3), &rollouts, &flat, &SurrogateConfig::default(), &mut rng).unwrap();
        assert_eq!(policy, before);
    }

    #[test]
    fn unclipped_surrogate_is_the_policy_gradient() {
        let mut rng = Rng::new(1);
        let policy = PolicyNet::new(3, 2, 0.0, -0.5, &mut rng).unwrap();
        let samples: Vec<SurrogateSample> = (0..5)
            .map(|_| {
                let input = rng.normals(3);
                let (action, lp) = policy.head(&input).unwrap().reparam_sample(&mut rng);
                SurrogateSample {
                    input,
                    action,
                    old_log_prob: lp,
                    advantage: 1.0,
                }
            })
            .collect();
        let g = surrogate_gradient(&policy, &samples, 0.2).unwrap();
        let mut pg = vec![0.0; policy.num_params()];
        for s in &samples {
            for (p, l) in pg.iter_mut().zip(policy.log_prob_gradient(&s.input, &s.action).unwrap()) {
                *p += l / samples.len() as f64;
            }
        }
        for (a, b) in g.iter().zip(&pg) {
            assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn clipped_samples_contribute_nothing() {
        let mut rng = Rng::new(2);
        let policy = PolicyNet::new(1, 2, 0.0, 0.0, &mut rng).unwrap();
        let head = policy.head(&[1.0]).unwrap();
        let action = vec![0.3, -0.2];
        let lp = head.log_prob(&action);
        let s = SurrogateSample {
            input: vec![1.0],
            action,
            old_log_prob: lp - 1.0,
            advantage: 1.0,
        };
        assert!(surrogate_gradient(&policy, &[s], 0.2).unwrap().iter().all(|g| *g == 0.0));
    }

    #[test]
    fn bandit_greedy_probability_never_falls() {
        let mut rng = Rng::new(3);
        let mut policy = PolicyNet::new(1, 2, 0.0, 0.0, &mut rng).unwrap();
        let cfg = SurrogateConfig {
            lr: 0.01,
            minibatch: 1000,
            ..Default::default()
        };
        // P(a_0 > 0) for the Gaussian head
        let greedy = |p: &PolicyNet| {
            let h = p.head(&[1.0]).unwrap();
            h.mean[0] / h.log_std[0].exp()
        };
        let mut adam = Adam::new(policy.num_params(), cfg.lr);
        let mut last = greedy(&policy);
        for _ in 0..100 {
            let (rollouts, rewards) = bandit_rollouts(&policy, 1000, &mut rng);
            policy_update(&mut policy, &mut adam, &rollouts, &rewards, &cfg, &mut rng).unwrap();
            let now = greedy(&policy);
            assert!(now >= last, "{now} after {last}");
            last = now;
        }
        assert!(last > 1.0);
    }

    #[test]
    fn mismatched_rewards_are_rejected() {
        let mut rng = Rng::new(4);
        let mut policy = PolicyNet::new(1, 2, 0.0, 0.0, &mut rng).unwrap();
        let (rollouts, _) = bandit_rollouts(&policy, 2, &mut rng);
        let mut adam = Adam::new(policy.num_params(), 1e-3);
        let cfg = SurrogateConfig::default();
        assert!(policy_update(&mut policy, &mut adam, &rollouts, &[vec![1.0]], &cfg, &mut rng).is_err());
        assert!(policy_update(&mut policy, &mut adam, &[], &[], &cfg, &mut rng).is_err());
    }
}
