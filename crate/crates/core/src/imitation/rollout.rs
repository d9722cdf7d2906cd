use super::env::CircleWorld;
use super::expert::Trajectory;
use crate::error::Result;
use crate::mediator::CodeMode;
use crate::numerics::{GaussianPolicy, Rng};

/// Policy network `π`: `[s; c]` to a Gaussian over the 2-D action.
pub type PolicyNet = GaussianPolicy;

/// `[s; c]`.
pub fn policy_input(state: &[f64], code: &[f64]) -> Vec<f64> {
    state.iter().chain(code).copied().collect()
}

/// Mediator input `I = (s, a)`.
pub fn mediator_input(state: &[f64], action: &[f64]) -> Vec<f64> {
    state.iter().chain(action).copied().collect()
}

/// The code the mediator emits for `input`.
pub fn mediator_code(mediator: &GaussianPolicy, input: &[f64], mode: CodeMode, rng: &mut Rng) -> Result<Vec<f64>> {
    let head = mediator.head(input)?;
    Ok(match mode {
        CodeMode::Mean => head.mean,
        CodeMode::Sample => head.reparam_sample(rng).0,
    })
}

/// A rollout together with the log density of each action under the policy
/// that sampled it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Rollout {
    pub trajectory: Trajectory,
    pub log_probs: Vec<f64>,
}

/// Correlated rollout from the environment's current state: the first code
/// is zero, every later code is drawn from the mediator given the state
/// reached and the action that reached it. Stops when the environment ends
/// the episode or after `n` steps.
///
/// The trajectory records, for each step, the state, the sampled action and
/// the code the action was conditioned on.
pub fn correlated_rollout(
    policy: &PolicyNet,
    mediator: &GaussianPolicy,
    mode: CodeMode,
    env: &mut CircleWorld,
    n: usize,
    rng: &mut Rng,
) -> Result<Rollout> {
    let mut tr = Trajectory::default();
    let mut log_probs = Vec::with_capacity(n);
    let mut state = env.observation();
    let mut code = vec![0.0; mediator.output_dim()];
    for _ in 0..n {
        let head = policy.head(&policy_input(&state, &code))?;
        let (action, lp) = head.reparam_sample(rng);
        tr.states.push(state.clone());
        tr.codes.push(code.clone());
        tr.positions.push(env.position());
        let (next, done) = env.step(&action)?;
        code = mediator_code(mediator, &mediator_input(&next, &action), mode, rng)?;
        tr.actions.push(action);
        tr.rewards.push(0.0);
        log_probs.push(lp);
        state = next;
        if done {
            break;
        }
    }
    Ok(Rollout {
        trajectory: tr,
        log_probs,
    })
}

/// Recomputes the code chain of a recorded trajectory with `mediator`,
/// starting from the zero code.
pub fn relabel_codes(tr: &Trajectory, mediator: &GaussianPolicy, mode: CodeMode, rng: &mut Rng) -> Result<Trajectory> {
    let mut out = tr.clone();
    let mut code = vec![0.0; mediator.output_dim()];
    for i in 0..tr.len() {
        out.codes[i] = code;
        code = match tr.states.get(i + 1) {
            Some(next) => mediator_code(mediator, &mediator_input(next, &tr.actions[i]), mode, rng)?,
            None => Vec::new(),
        };
    }
    Ok(out)
}
