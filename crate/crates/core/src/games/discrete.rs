use serde::{Deserialize, Serialize};

use super::pennies::PAYOFF;
use crate::error::{Error, Result};

const SIMPLEX_TOL: f64 = 1e-12;

/// Probability vector over a finite action set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexStrategy(Vec<f64>);

impl SimplexStrategy {
    /// Validates nonnegativity and unit mass (±1e-12).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::precondition("empty mixed strategy"));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::precondition(format!("negative or non-finite probability in {probs:?}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::precondition(format!("probabilities sum to {total}")));
        }
        Ok(SimplexStrategy(probs))
    }

    /// Rescales a positive weight vector onto the simplex.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::numeric("normalize", format!("weights sum to {total}")));
        }
        Ok(SimplexStrategy(weights.into_iter().map(|w| w / total).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        SimplexStrategy(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&p| p > 0.0)
    }
}

/// A two-action zero-sum matrix game. `loss[i][j]` is the agent's loss when
/// it plays `i` and the discriminator plays `j`; the discriminator's loss is
/// its negation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixGame {
    pub loss: [[f64; 2]; 2],
}

impl MatrixGame {
    pub fn matching_pennies() -> Self {
        MatrixGame { loss: PAYOFF }
    }

    /// Agent's expected loss of each pure action against `disc`.
    pub fn agent_marginal_losses(&self, disc: &[f64]) -> [f64; 2] {
        let l = &self.loss;
        [
            l[0][0] * disc[0] + l[0][1] * disc[1],
            l[1][0] * disc[0] + l[1][1] * disc[1],
        ]
    }

    /// Discriminator's expected loss (`−L`) of each pure action against `agent`.
    pub fn disc_marginal_losses(&self, agent: &[f64]) -> [f64; 2] {
        let l = &self.loss;
        [
            -(l[0][0] * agent[0] + l[1][0] * agent[1]),
            -(l[0][1] * agent[0] + l[1][1] * agent[1]),
        ]
    }

    /// Agent's expected loss under the product of the two mixtures.
    pub fn expected_loss(&self, agent: &[f64], disc: &[f64]) -> f64 {
        let u = self.agent_marginal_losses(disc);
        agent[0] * u[0] + agent[1] * u[1]
    }

    /// Fully mixed equilibrium of a 2×2 zero-sum game, when one exists.
    pub fn interior_mne(&self) -> Option<(SimplexStrategy, SimplexStrategy)> {
        let l = &self.loss;
        let denom = l[0][0] - l[0][1] - l[1][0] + l[1][1];
        if denom.abs() < 1e-15 {
            return None;
        }
        // agent mixes so the discriminator is indifferent, and vice versa
        let p = (l[1][1] - l[1][0]) / denom;
        let q = (l[1][1] - l[0][1]) / denom;
        if !(0.0 < p && p < 1.0 && 0.0 < q && q < 1.0) {
            return None;
        }
        Some((
            SimplexStrategy(vec![p, 1.0 - p]),
            SimplexStrategy(vec![q, 1.0 - q]),
        ))
    }
}
