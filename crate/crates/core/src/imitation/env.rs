use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Positions remembered in an observation.
pub const HISTORY: usize = 5;
/// Observation size: the last five positions, flattened.
pub const OBS_DIM: usize = 2 * HISTORY;
pub const ACTION_DIM: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircleWorldConfig {
    /// Distance travelled per step.
    pub step_size: f64,
    /// Episode cap `n`.
    pub episode_len: usize,
}

impl Default for CircleWorldConfig {
    fn default() -> Self {
        CircleWorldConfig {
            step_size: 0.05,
            episode_len: 100,
        }
    }
}

/// A point moving in the plane by fixed-length steps in a chosen direction.
#[derive(Clone, Debug)]
pub struct CircleWorld {
    config: CircleWorldConfig,
    pos: [f64; 2],
    history: VecDeque<[f64; 2]>,
    t: usize,
}

impl CircleWorld {
    pub fn new(config: CircleWorldConfig) -> Result<Self> {
        if !(config.step_size > 0.0) {
            return Err(Error::config("circleworld step size must be positive"));
        }
        Ok(CircleWorld {
            config,
            pos: [0.0; 2],
            history: VecDeque::with_capacity(HISTORY),
            t: 0,
        })
    }

    pub fn config(&self) -> &CircleWorldConfig {
        &self.config
    }

    pub fn position(&self) -> [f64; 2] {
        self.pos
    }

    /// Starts an episode at `start`; earlier history slots read as zero.
    pub fn reset(&mut self, start: [f64; 2]) -> Vec<f64> {
        self.pos = start;
        self.t = 0;
        self.history.clear();
        self.history.push_back(start);
        self.observation()
    }

    /// Starts an episode at a uniformly random angle on the circle of
    /// `radius`.
    pub fn reset_on_circle(&mut self, radius: f64, rng: &mut Rng) -> Vec<f64> {
        let theta = rng.uniform_range(0.0, std::f64::consts::TAU);
        self.reset([radius * theta.cos(), radius * theta.sin()])
    }

    /// Oldest position first, zero-padded at the front.
    pub fn observation(&self) -> Vec<f64> {
        let pad = HISTORY - self.history.len();
        let mut obs = vec![0.0; 2 * pad];
        obs.extend(self.history.iter().flat_map(|p| p.iter().copied()));
        obs
    }

    /// Moves `step_size` along `action`, returning the next observation and
    /// whether the episode cap was reached.
    pub fn step(&mut self, action: &[f64]) -> Result<(Vec<f64>, bool)> {
        let dir = unit(action)?;
        self.pos = [
            self.pos[0] + self.config.step_size * dir[0],
            self.pos[1] + self.config.step_size * dir[1],
        ];
        if self.history.len() == HISTORY {
            self.history.pop_front();
        }
        self.history.push_back(self.pos);
        self.t += 1;
        Ok((self.observation(), self.t >= self.config.episode_len))
    }
}

/// `action / ‖action‖`.
pub fn unit(action: &[f64]) -> Result<[f64; 2]> {
    if action.len() != ACTION_DIM {
        return Err(Error::config(format!("action has {} components, expected 2", action.len())));
    }
    let norm = action[0].hypot(action[1]);
    if !norm.is_finite() || norm == 0.0 {
        return Err(Error::numeric("circleworld step", format!("cannot normalize action {action:?}")));
    }
    Ok([action[0] / norm, action[1] / norm])
}
