//! Continuous matching pennies and its rectified variant.
//!
//! Strategies are real 2-vectors; the agent's loss is the bilinear form
//! `φᵀAω` with `A = [[1, −1], [−1, 1]]`. In the convex game the
//! discriminator's loss is its negation, in the rectified game it is
//! `max(0, −φᵀAω)`.
//!
//! Mediator codes act as nonnegative Lagrangian weights on each player's own
//! strategy norm: the code pair `(c_π, c_D)` adds
//! `P = ½c_π²‖φ‖² − ½c_D²‖ω‖²` to the agent's loss and subtracts it from the
//! discriminator's. The perturbed game stays zero-sum when the original is,
//! keeps its saddle at the origin, and is the original game when `c = 0`.

use serde::{Deserialize, Serialize};

use crate::numerics::{bilinear, squared_norm, Scalar};

/// The agent's loss matrix.
pub const PAYOFF: [[f64; 2]; 2] = [[1.0, -1.0], [-1.0, 1.0]];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenniesVariant {
    /// Zero-sum: `loss_D = −loss_π`.
    Convex,
    /// `loss_D = ReLU(−φᵀAω)`.
    Relu,
}

/// The per-player code weights `(c_π, c_D)` carried by a code of length
/// 0, 1 or 2. A single code is shared by both players.
pub fn split_code<S: Scalar>(code: &[S]) -> Option<(S, S)> {
    match code.len() {
        0 => None,
        1 => Some((code[0], code[0])),
        _ => Some((code[0], code[1])),
    }
}

/// `½c_π²‖φ‖² − ½c_D²‖ω‖²`, or `None` without a code.
fn code_penalty<S: Scalar>(phi: &[S], omega: &[S], code: &[S]) -> Option<S> {
    split_code(code).map(|(cp, cd)| {
        cp.square() * squared_norm(phi) * 0.5 - cd.square() * squared_norm(omega) * 0.5
    })
}

/// Bilinear value `φᵀAω`.
pub fn payoff<S: Scalar>(phi: &[S], omega: &[S]) -> S {
    bilinear(phi, &PAYOFF, omega)
}

/// Agent loss of the convex game under `code`.
///
/// ```
/// use ftnpl::games::pennies_loss;
///
/// assert_eq!(pennies_loss(&[1.0, 0.0], &[1.0, 0.0], &[]), 1.0);
/// assert_eq!(pennies_loss(&[1.0, 0.0], &[0.0, 1.0], &[]), -1.0);
/// ```
pub fn pennies_loss<S: Scalar>(phi: &[S], omega: &[S], code: &[S]) -> S {
    let base = payoff(phi, omega);
    match code_penalty(phi, omega, code) {
        Some(p) => base + p,
        None => base,
    }
}

/// `(loss_π, loss_D)` of the rectified game under `code`.
pub fn relu_pennies_losses<S: Scalar>(phi: &[S], omega: &[S], code: &[S]) -> (S, S) {
    let base = payoff(phi, omega);
    let disc = (-base).relu();
    match code_penalty(phi, omega, code) {
        Some(p) => (base + p, disc - p),
        None => (base, disc),
    }
}

impl PenniesVariant {
    pub fn is_zero_sum(self) -> bool {
        matches!(self, PenniesVariant::Convex)
    }

    pub fn loss_pi<S: Scalar>(self, phi: &[S], omega: &[S], code: &[S]) -> S {
        match self {
            PenniesVariant::Convex => pennies_loss(phi, omega, code),
            PenniesVariant::Relu => relu_pennies_losses(phi, omega, code).0,
        }
    }

    pub fn loss_d<S: Scalar>(self, phi: &[S], omega: &[S], code: &[S]) -> S {
        match self {
            PenniesVariant::Convex => -pennies_loss(phi, omega, code),
            PenniesVariant::Relu => relu_pennies_losses(phi, omega, code).1,
        }
    }

    /// Both variants share the saddle `φ* = ω* = (0, 0)`.
    pub fn mne(self) -> ([f64; 2], [f64; 2]) {
        ([0.0; 2], [0.0; 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{finite_diff, grad, relative_error, Rng};

    fn random_point(rng: &mut Rng, c: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut draw = |n| (0..n).map(|_| rng.uniform_range(-2.0, 2.0)).collect::<Vec<_>>();
        (draw(2), draw(2), draw(c))
    }

    #[test]
    fn zero_agent_strategy_annihilates() {
        assert_eq!(pennies_loss(&[0.0, 0.0], &[3.0, -7.0], &[]), 0.0);
    }

    #[test]
    fn rectified_discriminator_loss() {
        // φ̃ᵀAω̃ = 1 and = −1 respectively
        assert_eq!(relu_pennies_losses(&[1.0, 0.0], &[1.0, 0.0], &[]), (1.0, 0.0));
        assert_eq!(relu_pennies_losses(&[1.0, 0.0], &[0.0, 1.0], &[]), (-1.0, 1.0));
        assert_eq!(relu_pennies_losses(&[0.0, 0.0], &[0.4, 2.0], &[]), (0.0, 0.0));
    }

    #[test]
    fn zero_code_reduces_to_plain_game() {
        let mut rng = Rng::new(1);
        for c in 1..=2 {
            for _ in 0..100 {
                let (p, w, _) = random_point(&mut rng, 0);
                let zero = vec![0.0; c];
                assert_eq!(pennies_loss(&p, &w, &zero), pennies_loss(&p, &w, &[]));
                assert_eq!(relu_pennies_losses(&p, &w, &zero), relu_pennies_losses(&p, &w, &[]));
            }
        }
    }

    #[test]
    fn convex_game_is_zero_sum_under_codes() {
        let mut rng = Rng::new(2);
        for _ in 0..100 {
            let (p, w, c) = random_point(&mut rng, 2);
            let v = PenniesVariant::Convex;
            assert!((v.loss_pi(&p, &w, &c) + v.loss_d(&p, &w, &c)).abs() <= 1e-12);
        }
    }

    #[test]
    fn saddle_at_origin() {
        let mut rng = Rng::new(3);
        for _ in 0..100 {
            let (p, w, _) = random_point(&mut rng, 0);
            assert_eq!(pennies_loss(&[0.0, 0.0], &w, &[0.0, 0.0]), 0.0);
            assert_eq!(pennies_loss(&p, &[0.0, 0.0], &[0.0, 0.0]), 0.0);
        }
    }

    #[test]
    fn rectified_discriminator_loss_is_nonnegative_without_codes() {
        let mut rng = Rng::new(4);
        for _ in 0..100 {
            let (p, w, _) = random_point(&mut rng, 0);
            assert!(relu_pennies_losses(&p, &w, &[]).1 >= 0.0);
        }
    }

    #[test]
    fn single_code_is_shared() {
        let p = [0.5, -1.0];
        let w = [2.0, 0.3];
        assert_eq!(pennies_loss(&p, &w, &[0.7]), pennies_loss(&p, &w, &[0.7, 0.7]));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = Rng::new(5);
        for variant in [PenniesVariant::Convex, PenniesVariant::Relu] {
            for _ in 0..100 {
                let (p, w, c) = random_point(&mut rng, 2);
                let x: Vec<f64> = p.iter().chain(&w).chain(&c).copied().collect();
                for which in 0..2 {
                    let f = |v: &[f64]| match which {
                        0 => variant.loss_pi(&v[0..2], &v[2..4], &v[4..6]),
                        _ => variant.loss_d(&v[0..2], &v[2..4], &v[4..6]),
                    };
                    let g = grad(
                        |v| match which {
                            0 => variant.loss_pi(&v[0..2], &v[2..4], &v[4..6]),
                            _ => variant.loss_d(&v[0..2], &v[2..4], &v[4..6]),
                        },
                        &x,
                    )
                    .unwrap();
                    let fd = finite_diff(f, &x, 1e-5);
                    assert!(relative_error(&g, &fd, 1e-8) <= 1e-5, "{variant:?} {x:?}");
                }
            }
        }
    }
}
