//! Seeded randomness, reverse-mode differentiation, small networks and
//! sampling primitives shared by every game.

mod adam;
mod diff;
mod gaussian;
mod mlp;
mod policy;
mod rng;
mod scalar;
mod tape;

pub use adam::Adam;
pub use diff::{finite_diff, grad, relative_error, value_and_grad};
pub use gaussian::{diag_gaussian_log_prob, GaussianHead, LOG_STD_MAX, LOG_STD_MIN};
pub use mlp::{Activation, MlpParams, MlpShape};
pub use policy::GaussianPolicy;
pub use rng::{exponential_from_uniform, Rng};
pub use scalar::{bilinear, dot, mean, sigmoid, squared_norm, sum, Scalar};
pub use tape::{Op, Tape, Var};

/// Draws `σ ~ Exp(ζ)` by inverse CDF.
pub fn sample_exponential(zeta: f64, rng: &mut Rng) -> crate::Result<f64> {
    rng.exponential(zeta)
}

/// Draws `c = mean + exp(log_std) ⊙ ε` and its log density.
pub fn gaussian_reparam_sample(head: &GaussianHead, rng: &mut Rng) -> (Vec<f64>, f64) {
    head.reparam_sample(rng)
}
