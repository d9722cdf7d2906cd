use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pairwise marginal payoff gains `G[i][j] = u[j] − u[i]` of both players
/// over their `K` queued strategies.
#[derive(Clone, Debug, PartialEq)]
pub struct GainMatrices {
    pub pi: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
}

impl GainMatrices {
    pub fn size(&self) -> usize {
        self.pi.len()
    }
}

fn pairwise(u: &[f64]) -> Vec<Vec<f64>> {
    u.iter().map(|ui| u.iter().map(|uj| uj - ui).collect()).collect()
}

/// Gains from each player's per-strategy marginal losses.
///
/// ```
/// use ftnpl::mediator::marginal_gains;
///
/// let g = marginal_gains(&[0.0, 1.0], &[0.0, 0.0]).unwrap();
/// assert_eq!(g.pi, vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
/// ```
pub fn marginal_gains(u_pi: &[f64], u_d: &[f64]) -> Result<GainMatrices> {
    if u_pi.len() != u_d.len() {
        return Err(Error::precondition(format!(
            "{} agent losses but {} discriminator losses",
            u_pi.len(),
            u_d.len()
        )));
    }
    if u_pi.is_empty() {
        return Err(Error::precondition("marginal gains need at least one strategy"));
    }
    Ok(GainMatrices {
        pi: pairwise(u_pi),
        d: pairwise(u_d),
    })
}

/// How positive gains are penalized in the mediator's reward.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Penalty {
    /// `−Σ ReLU(G_π + G_D)`.
    ReluOfSum,
    /// `−Σ ReLU(G_π) + ReLU(G_D)`.
    SumOfRelus,
    /// `−Σ G_π² + G_D²`.
    #[default]
    Squared,
}

impl std::str::FromStr for Penalty {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "relu_of_sum" => Ok(Penalty::ReluOfSum),
            "sum_of_relus" => Ok(Penalty::SumOfRelus),
            "squared" => Ok(Penalty::Squared),
            other => Err(format!(
                "unknown penalty `{other}`, expected relu_of_sum, sum_of_relus or squared"
            )),
        }
    }
}

/// Mediator reward `r_m ≤ 0`.
pub fn mediator_reward(gains: &GainMatrices, penalty: Penalty) -> f64 {
    let terms = gains
        .pi
        .iter()
        .flatten()
        .zip(gains.d.iter().flatten())
        .map(|(&gp, &gd)| match penalty {
            Penalty::ReluOfSum => (gp + gd).max(0.0),
            Penalty::SumOfRelus => gp.max(0.0) + gd.max(0.0),
            Penalty::Squared => gp * gp + gd * gd,
        });
    -terms.sum::<f64>()
}
