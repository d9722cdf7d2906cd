use serde::{Deserialize, Serialize};

use super::gaussian::{GaussianHead, LOG_STD_MAX, LOG_STD_MIN};
use super::mlp::{Activation, MlpParams, MlpShape};
use super::rng::Rng;
use crate::error::{ensure_finite, Error, Result};

/// Gaussian policy: a tanh network mapping an input to the mean of a
/// diagonal Gaussian, with a learned input-independent `log_std`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianPolicy {
    trunk: MlpParams,
    log_std: Vec<f64>,
}

impl GaussianPolicy {
    pub const HIDDEN: [usize; 2] = [32, 32];

    /// Random trunk with small output weights, `log_std` set to
    /// `initial_log_std` and the mean offset by `initial_mean`.
    pub fn new(input_dim: usize, output_dim: usize, initial_mean: f64, initial_log_std: f64, rng: &mut Rng) -> Result<Self> {
        if output_dim == 0 {
            return Err(Error::config("policy output size must be at least 1"));
        }
        let shape = MlpShape::uniform(input_dim, &Self::HIDDEN, output_dim, Activation::Tanh)?;
        let mut trunk = MlpParams::init(shape, 0.1, rng);
        let layers = trunk.shape().num_layers();
        let n = trunk.len();
        // the output bias is the trailing block
        for b in &mut trunk.flat_mut()[n - output_dim..] {
            *b = initial_mean;
        }
        debug_assert_eq!(trunk.layer(layers - 1).1.len(), output_dim);
        Ok(GaussianPolicy {
            trunk,
            log_std: vec![initial_log_std; output_dim],
        })
    }

    pub fn output_dim(&self) -> usize {
        self.log_std.len()
    }

    pub fn input_dim(&self) -> usize {
        self.trunk.shape().input_dim()
    }

    pub fn num_params(&self) -> usize {
        self.trunk.len() + self.log_std.len()
    }

    /// All parameters as one flat vector: trunk parameters, then `log_std`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.trunk.flat().to_vec();
        p.extend_from_slice(&self.log_std);
        p
    }

    pub fn add_scaled(&mut self, direction: &[f64], step: f64) {
        let n = self.trunk.len();
        self.trunk.add_scaled(&direction[..n], step);
        for (s, d) in self.log_std.iter_mut().zip(&direction[n..]) {
            *s += step * d;
        }
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::config(format!(
                "policy expects {} inputs, got {}",
                self.input_dim(),
                input.len()
            )));
        }
        Ok(())
    }

    pub fn head(&self, input: &[f64]) -> Result<GaussianHead> {
        self.check_input(input)?;
        Ok(GaussianHead::new(self.trunk.forward(input)?, self.log_std.clone()))
    }

    /// `∇ log p(x | input)` with respect to [`params`](Self::params).
    pub fn log_prob_gradient(&self, input: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        if x.len() != self.output_dim() {
            return Err(Error::config(format!(
                "sample of length {} for a policy of size {}",
                x.len(),
                self.output_dim()
            )));
        }
        let n = self.trunk.len();
        let mut g = vec![0.0; self.num_params()];
        let mean = self.trunk.forward(input)?;
        let mut cot = Vec::with_capacity(x.len());
        for (i, (xi, mi)) in x.iter().zip(&mean).enumerate() {
            let raw = self.log_std[i];
            let s = raw.clamp(LOG_STD_MIN, LOG_STD_MAX);
            let var = (2.0 * s).exp();
            cot.push((xi - mi) / var);
            if (LOG_STD_MIN..=LOG_STD_MAX).contains(&raw) {
                g[n + i] = (xi - mi).powi(2) / var - 1.0;
            }
        }
        self.trunk.shape().backward(self.trunk.flat(), input, &cot, &mut g[..n])?;
        ensure_finite("log_prob_gradient", &g)?;
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{diag_gaussian_log_prob, Tape};

    fn taped(policy: &GaussianPolicy, input: &[f64], x: &[f64]) -> Vec<f64> {
        let tape = Tape::new();
        let psi = tape.vars(&policy.params());
        let (w, s) = psi.split_at(policy.trunk.len());
        let mean = policy.trunk.shape().forward(w, &tape.constants(input)).unwrap();
        let lp = diag_gaussian_log_prob(&tape.constants(x), &mean, s);
        tape.gradient(lp, &psi)
    }

    #[test]
    fn log_prob_gradient_matches_the_tape() {
        let mut rng = Rng::new(0);
        for log_std in [-0.7, 0.3, -6.0, 2.5] {
            let policy = GaussianPolicy::new(5, 3, 0.2, log_std, &mut rng).unwrap();
            let input = rng.normals(5);
            let x = rng.normals(3);
            let g = policy.log_prob_gradient(&input, &x).unwrap();
            for (a, b) in g.iter().zip(taped(&policy, &input, &x)) {
                assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn wrong_sizes_are_config_errors() {
        let policy = GaussianPolicy::new(2, 1, 0.0, 0.0, &mut Rng::new(1)).unwrap();
        assert!(matches!(policy.head(&[1.0]), Err(Error::Config(_))));
        assert!(matches!(policy.log_prob_gradient(&[1.0, 2.0], &[0.0, 0.0]), Err(Error::Config(_))));
    }
}

