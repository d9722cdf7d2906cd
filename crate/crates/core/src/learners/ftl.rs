use serde::{Deserialize, Serialize};

use super::queue::HistoryQueue;
use crate::error::{ensure_finite, Error, Result};
use crate::games::PenniesVariant;
use crate::numerics::{sum, Tape, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Agent,
    Discriminator,
}

/// One follow-the-leader step against every queued opponent snapshot:
/// `θ' = θ − η·∇_θ Σ_{o ∈ queue} loss(θ, o)`.
///
/// The losses are summed, not averaged, so the step grows with the number
/// of snapshots.
pub fn ftl_queue_step<T, F>(own: &[f64], opponents: &HistoryQueue<T>, eta: f64, loss: F) -> Result<Vec<f64>>
where
    F: for<'t> Fn(&[Var<'t>], &T) -> Result<Var<'t>>,
{
    let g = queue_gradient(own, opponents, loss)?;
    Ok(own.iter().zip(&g).map(|(p, gi)| p - eta * gi).collect())
}

/// `∇_θ Σ_{o ∈ queue} loss(θ, o)`.
pub fn queue_gradient<T, F>(own: &[f64], opponents: &HistoryQueue<T>, loss: F) -> Result<Vec<f64>>
where
    F: for<'t> Fn(&[Var<'t>], &T) -> Result<Var<'t>>,
{
    if opponents.is_empty() {
        return Err(Error::precondition("follow-the-leader step needs a nonempty opponent queue"));
    }
    let tape = Tape::new();
    let vars = tape.vars(own);
    let terms = opponents
        .iter()
        .map(|o| loss(&vars, o))
        .collect::<Result<Vec<_>>>()?;
    let total = sum(terms);
    tape.check_finite()?;
    let g = tape.gradient(total, &vars);
    ensure_finite("ftl_queue_step", &g)?;
    Ok(g)
}

/// [`ftl_queue_step`] for a continuous pennies player under a fixed code.
pub fn pennies_queue_step(
    variant: PenniesVariant,
    role: Role,
    own: &[f64],
    opponents: &HistoryQueue<Vec<f64>>,
    code: &[f64],
    eta: f64,
) -> Result<Vec<f64>> {
    ftl_queue_step(own, opponents, eta, |me, opp| {
        let tape = me[0].tape();
        let opp = tape.constants(opp);
        let c = tape.constants(code);
        Ok(match role {
            Role::Agent => variant.loss_pi(me, &opp, &c),
            Role::Discriminator => variant.loss_d(&opp, me, &c),
        })
    })
}
