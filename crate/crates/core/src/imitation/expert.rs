use std::io::Write;

use serde::{Deserialize, Serialize};

use super::env::{unit, CircleWorld, CircleWorldConfig};
use crate::error::Result;
use crate::numerics::Rng;

/// One of the expert's circular behaviours.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpertMode {
    pub radius: f64,
    pub counter_clockwise: bool,
    /// Radial correction per unit of radius error, measured in step sizes.
    pub gain: f64,
    /// Std of the Gaussian noise added to the action before normalizing.
    pub noise: f64,
}

impl Default for ExpertMode {
    fn default() -> Self {
        ExpertMode {
            radius: 0.5,
            counter_clockwise: true,
            gain: 1.0,
            noise: 0.05,
        }
    }
}

impl ExpertMode {
    /// The three demonstrated modes.
    pub fn defaults() -> Vec<ExpertMode> {
        [0.25, 0.5, 0.75]
            .into_iter()
            .map(|radius| ExpertMode {
                radius,
                ..Default::default()
            })
            .collect()
    }

    /// Noise-free steering direction at `pos` (unnormalized).
    pub fn steer(&self, pos: [f64; 2], step_size: f64) -> [f64; 2] {
        let rho = pos[0].hypot(pos[1]);
        if rho == 0.0 {
            return [1.0, 0.0];
        }
        let radial = [pos[0] / rho, pos[1] / rho];
        let tangent = if self.counter_clockwise {
            [-radial[1], radial[0]]
        } else {
            [radial[1], -radial[0]]
        };
        let k = self.gain * (self.radius - rho) / step_size;
        [tangent[0] + k * radial[0], tangent[1] + k * radial[1]]
    }
}

/// States, actions and codes of one rollout, index-aligned.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub states: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub codes: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    /// Position of the mover when each action was taken.
    pub positions: Vec<[f64; 2]>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn mean_radius(&self) -> f64 {
        if self.positions.is_empty() {
            return 0.0;
        }
        self.positions.iter().map(|p| p[0].hypot(p[1])).sum::<f64>() / self.positions.len() as f64
    }
}

/// Writes `x,y,ax,ay` rows, the action normalized to the direction taken.
pub fn write_trajectories_csv<W: Write>(trajectories: &[Trajectory], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "ax", "ay"])?;
    for tr in trajectories {
        for (p, a) in tr.positions.iter().zip(&tr.actions) {
            let d = unit(a)?;
            w.write_record([p[0].to_string(), p[1].to_string(), d[0].to_string(), d[1].to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// A demonstration of `steps` moves starting on the mode's circle. Expert
/// codes are all zero.
pub fn expert_generate(mode: &ExpertMode, env: &CircleWorldConfig, code_size: usize, steps: usize, rng: &mut Rng) -> Result<Trajectory> {
    let mut world = CircleWorld::new(CircleWorldConfig {
        episode_len: steps,
        ..env.clone()
    })?;
    let mut tr = Trajectory::default();
    if steps == 0 {
        return Ok(tr);
    }
    let mut obs = world.reset_on_circle(mode.radius, rng);
    loop {
        let pos = world.position();
        let s = mode.steer(pos, env.step_size);
        let action = vec![s[0] + mode.noise * rng.normal(), s[1] + mode.noise * rng.normal()];
        tr.states.push(obs);
        tr.codes.push(vec![0.0; code_size]);
        tr.positions.push(pos);
        let (next, done) = world.step(&action)?;
        tr.actions.push(action);
        tr.rewards.push(0.0);
        obs = next;
        if done {
            return Ok(tr);
        }
    }
}
