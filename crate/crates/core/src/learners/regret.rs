//! External regret: realized cumulative loss minus the cumulative loss of
//! the best fixed strategy in hindsight.

use super::ftl::Role;
use super::ftrl::mw_step;
use crate::error::{Error, Result};
use crate::games::{MatrixGame, PenniesVariant, SimplexStrategy};

/// One round of a discrete game: both players' mixed strategies.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedPlay {
    pub agent: [f64; 2],
    pub disc: [f64; 2],
}

impl MixedPlay {
    pub fn pure(agent: usize, disc: usize) -> Self {
        let mut a = [0.0; 2];
        let mut d = [0.0; 2];
        a[agent] = 1.0;
        d[disc] = 1.0;
        MixedPlay { agent: a, disc: d }
    }
}

/// Exact external regret in a discrete game, enumerating fixed actions.
pub fn discrete_regret(game: &MatrixGame, history: &[MixedPlay], role: Role) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::precondition("regret of an empty history"));
    }
    let mut realized = 0.0;
    let mut fixed = [0.0; 2];
    for play in history {
        let (own, losses) = match role {
            Role::Agent => (play.agent, game.agent_marginal_losses(&play.disc)),
            Role::Discriminator => (play.disc, game.disc_marginal_losses(&play.agent)),
        };
        realized += own[0] * losses[0] + own[1] * losses[1];
        fixed[0] += losses[0];
        fixed[1] += losses[1];
    }
    Ok(realized - fixed[0].min(fixed[1]))
}

/// External regret in continuous pennies against the best fixed strategy in
/// the box `[−bound, bound]²`.
///
/// Both losses depend on a strategy only through its projection
/// `x = θ[0] − θ[1] ∈ [−2B, 2B]` and are convex piecewise linear in it with
/// a single kink at zero, so the best fixed strategy is attained at
/// `x ∈ {−2B, 0, 2B}`.
pub fn pennies_regret(
    variant: PenniesVariant,
    history: &[([f64; 2], [f64; 2])],
    role: Role,
    bound: f64,
) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::precondition("regret of an empty history"));
    }
    let realized: f64 = history
        .iter()
        .map(|(p, w)| match role {
            Role::Agent => variant.loss_pi(p, w, &[]),
            Role::Discriminator => variant.loss_d(p, w, &[]),
        })
        .sum();
    let candidates = [[-bound, bound], [0.0, 0.0], [bound, -bound]];
    let best = candidates
        .iter()
        .map(|c| {
            history
                .iter()
                .map(|(p, w)| match role {
                    Role::Agent => variant.loss_pi(c, w, &[]),
                    Role::Discriminator => variant.loss_d(p, c, &[]),
                })
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    Ok(realized - best)
}

/// Multiplicative-weights self-play: both players update simultaneously
/// against each other's current mixture. Returns the `rounds` plays.
pub fn mw_self_play(
    game: &MatrixGame,
    agent: SimplexStrategy,
    disc: SimplexStrategy,
    eta: f64,
    rounds: usize,
) -> Result<Vec<MixedPlay>> {
    let (mut a, mut d) = (agent, disc);
    let mut plays = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        plays.push(MixedPlay {
            agent: [a.probs()[0], a.probs()[1]],
            disc: [d.probs()[0], d.probs()[1]],
        });
        let ua = game.agent_marginal_losses(d.probs());
        let ud = game.disc_marginal_losses(a.probs());
        a = mw_step(&a, &ua, eta)?;
        d = mw_step(&d, &ud, eta)?;
    }
    Ok(plays)
}
