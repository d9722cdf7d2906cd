//! The two-player games. Every loss takes an optional mediator code; an
//! empty or all-zero code gives back the unperturbed game.

mod discrete;
mod pennies;
mod toygan;

pub use discrete::{MatrixGame, SimplexStrategy};
pub use pennies::{payoff, pennies_loss, relu_pennies_losses, split_code, PenniesVariant, PAYOFF};
pub use toygan::{moments, GanBatch, ToyGan, ToyGanConfig};

use serde::{Deserialize, Serialize};

/// Game families known to the laboratory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    Pennies,
    PenniesNonconvex,
    DiscretePennies,
    ToyGan,
    CircleWorld,
}

/// Analytic equilibrium of a game, when one is known.
#[derive(Clone, Debug, PartialEq)]
pub enum Equilibrium {
    /// Parameter-space saddle `(φ*, ω*)`.
    Point { phi: Vec<f64>, omega: Vec<f64> },
    /// Mixed equilibrium over finite actions.
    Mixed {
        agent: SimplexStrategy,
        disc: SimplexStrategy,
    },
}

pub fn mne_reference(game: GameKind) -> Option<Equilibrium> {
    match game {
        GameKind::Pennies | GameKind::PenniesNonconvex => Some(Equilibrium::Point {
            phi: vec![0.0, 0.0],
            omega: vec![0.0, 0.0],
        }),
        GameKind::DiscretePennies => MatrixGame::matching_pennies()
            .interior_mne()
            .map(|(agent, disc)| Equilibrium::Mixed { agent, disc }),
        GameKind::ToyGan | GameKind::CircleWorld => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_equilibria() {
        assert_eq!(
            mne_reference(GameKind::Pennies),
            Some(Equilibrium::Point {
                phi: vec![0.0, 0.0],
                omega: vec![0.0, 0.0]
            })
        );
        assert_eq!(mne_reference(GameKind::PenniesNonconvex), mne_reference(GameKind::Pennies));
        match mne_reference(GameKind::DiscretePennies) {
            Some(Equilibrium::Mixed { agent, disc }) => {
                assert_eq!(agent.probs(), &[0.5, 0.5]);
                assert_eq!(disc.probs(), &[0.5, 0.5]);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(mne_reference(GameKind::ToyGan), None);
    }
}
