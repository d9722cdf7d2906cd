//! Discrete matching pennies under multiplicative weights and its
//! continuous-time replicator flow.

use serde::{Deserialize, Serialize};

use crate::analytics::{cross_entropy_and_kl, step_metrics, RegretPoint, TrajectoryLog, TrajectoryRow};
use crate::error::{Error, Result};
use crate::games::{MatrixGame, SimplexStrategy};
use crate::learners::{discrete_regret, mw_self_play, replicator_rhs, rk4_integrate, MixedPlay, Role};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReplicatorOptions {
    pub agent0: [f64; 2],
    pub disc0: [f64; 2],
    /// Multiplicative-weights step size.
    pub lr: f64,
    /// Multiplicative-weights rounds.
    pub steps: usize,
    /// RK4 step of the flow.
    pub h: f64,
    /// Integration horizon of the flow.
    pub horizon: f64,
    /// Number of points on the regret curve.
    pub regret_points: usize,
}

impl Default for ReplicatorOptions {
    fn default() -> Self {
        ReplicatorOptions {
            agent0: [0.9, 0.1],
            disc0: [0.2, 0.8],
            lr: 0.01,
            steps: 10_000,
            h: 1e-3,
            horizon: 50.0,
            regret_points: 20,
        }
    }
}

impl ReplicatorOptions {
    fn start(&self) -> Result<(SimplexStrategy, SimplexStrategy)> {
        let a = SimplexStrategy::new(self.agent0.to_vec())?;
        let d = SimplexStrategy::new(self.disc0.to_vec())?;
        if !a.is_interior() || !d.is_interior() {
            return Err(Error::usage("agent0", "initial mixtures must be interior"));
        }
        Ok((a, d))
    }
}

/// The replicator flow and the cross-entropy to the equilibrium along it.
#[derive(Clone, Debug)]
pub struct FlowOutcome {
    pub h: f64,
    /// `[μ_π(0), μ_π(1), μ_D(0), μ_D(1)]` at every step.
    pub states: Vec<Vec<f64>>,
    pub cross_entropy: Vec<f64>,
    pub max_drift: f64,
}

impl FlowOutcome {
    /// `max_t |H(μ*, μ(t)) − H(μ*, μ(0))|`.
    pub fn max_deviation(&self) -> f64 {
        let h0 = self.cross_entropy[0];
        self.cross_entropy.iter().map(|h| (h - h0).abs()).fold(0.0, f64::max)
    }
}

pub fn run_replicator_flow(opts: &ReplicatorOptions) -> Result<FlowOutcome> {
    let (a, d) = opts.start()?;
    if !(opts.horizon >= 0.0) {
        return Err(Error::usage("horizon", "must be nonnegative"));
    }
    let game = MatrixGame::matching_pennies();
    let (mne_a, mne_d) = game
        .interior_mne()
        .ok_or_else(|| Error::precondition("matching pennies has an interior equilibrium"))?;
    let steps = (opts.horizon / opts.h).round() as usize;
    let y0: Vec<f64> = a.probs().iter().chain(d.probs()).copied().collect();
    let flow = rk4_integrate(
        |y| Ok(replicator_rhs(&game, &y[..2], &y[2..])?.to_vec()),
        &y0,
        opts.h,
        steps,
        &[2, 2],
    )?;
    let cross_entropy = flow
        .states
        .iter()
        .map(|y| cross_entropy_and_kl(mne_a.probs(), mne_d.probs(), &y[..2], &y[2..]).map(|(h, _)| h))
        .collect::<Result<Vec<_>>>()?;
    Ok(FlowOutcome {
        h: opts.h,
        max_drift: flow.max_drift(),
        states: flow.states,
        cross_entropy,
    })
}

/// A multiplicative-weights self-play run.
#[derive(Clone, Debug)]
pub struct MwOutcome {
    pub log: TrajectoryLog,
    pub plays: Vec<MixedPlay>,
    pub regret: Vec<RegretPoint>,
}

impl MwOutcome {
    /// Agent regret after the first `t` rounds.
    pub fn agent_regret(&self, t: usize) -> Result<f64> {
        discrete_regret(&MatrixGame::matching_pennies(), &self.plays[..t], Role::Agent)
    }
}

/// Multiplicative-weights self-play logged in the trajectory schema, with
/// `φ` and `ω` the two players' mixtures.
pub fn run_mw(opts: &ReplicatorOptions) -> Result<MwOutcome> {
    let (a, d) = opts.start()?;
    if !(opts.lr >= 0.0) {
        return Err(Error::usage("lr", "must be nonnegative"));
    }
    let game = MatrixGame::matching_pennies();
    let plays = mw_self_play(&game, a, d, opts.lr, opts.steps)?;
    let mne = [0.5; 4];
    let mut log = TrajectoryLog::new(0);
    let mut prev: Option<[f64; 4]> = None;
    for (t, p) in plays.iter().enumerate() {
        let state = [p.agent[0], p.agent[1], p.disc[0], p.disc[1]];
        let (step, dist) = step_metrics(&state, prev.as_ref().unwrap_or(&state), Some(&mne));
        let loss = game.expected_loss(&p.agent, &p.disc);
        log.push(TrajectoryRow {
            t: t as u64,
            phi: p.agent,
            omega: p.disc,
            code: Vec::new(),
            loss_pi: loss,
            loss_d: -loss,
            r_m: 0.0,
            step_norm_sq: step,
            dist_mne: dist,
        })?;
        prev = Some(state);
    }
    let regret = if plays.is_empty() || opts.regret_points == 0 {
        Vec::new()
    } else {
        let n = plays.len();
        let points = opts.regret_points.min(n);
        (1..=points)
            .map(|k| {
                let t = k * n / points;
                Ok(RegretPoint {
                    t: t as u64,
                    agent: discrete_regret(&game, &plays[..t], Role::Agent)?,
                    discriminator: discrete_regret(&game, &plays[..t], Role::Discriminator)?,
                })
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok(MwOutcome { log, plays, regret })
}
