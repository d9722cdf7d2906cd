use crate::error::{Error, Result};
use crate::games::MatrixGame;

/// Continuous-time multiplicative weights on a 2×2 zero-sum game.
///
/// Each action's share changes in proportion to how much better it does
/// than the player's current mixture:
/// `μ̇(k) = μ(k)·(ū − u(k))`, `ū = Σ_j μ(j)u(j)`, with `u` the marginal
/// losses against the opponent's current mixture. This is the `η → 0`
/// limit of [`mw_step`](super::mw_step).
///
/// Returns `[μ̇_π(0), μ̇_π(1), μ̇_D(0), μ̇_D(1)]`.
pub fn replicator_rhs(game: &MatrixGame, agent: &[f64], disc: &[f64]) -> Result<[f64; 4]> {
    if agent.len() != 2 || disc.len() != 2 {
        return Err(Error::precondition("replicator flow is defined for two actions per player"));
    }
    if agent.iter().chain(disc).any(|&p| !(p > 0.0)) {
        return Err(Error::precondition(format!(
            "replicator flow needs an interior state, got {agent:?} × {disc:?}"
        )));
    }
    Ok(replicator_field(game, agent, disc))
}

pub(crate) fn replicator_field(game: &MatrixGame, agent: &[f64], disc: &[f64]) -> [f64; 4] {
    let ua = game.agent_marginal_losses(disc);
    let ud = game.disc_marginal_losses(agent);
    let mean_a = agent[0] * ua[0] + agent[1] * ua[1];
    let mean_d = disc[0] * ud[0] + disc[1] * ud[1];
    [
        agent[0] * (mean_a - ua[0]),
        agent[1] * (mean_a - ua[1]),
        disc[0] * (mean_d - ud[0]),
        disc[1] * (mean_d - ud[1]),
    ]
}
