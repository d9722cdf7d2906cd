use crate::error::{Error, Result};
use crate::games::SimplexStrategy;

/// Running sum `G = Σ_{i<t} g_i` of a player's per-round loss gradients.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulativeGradient(Vec<f64>);

impl CumulativeGradient {
    pub fn zeros(dim: usize) -> Self {
        CumulativeGradient(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn accumulate(&mut self, g: &[f64]) {
        assert_eq!(g.len(), self.0.len(), "gradient dimension mismatch");
        for (s, x) in self.0.iter_mut().zip(g) {
            *s += x;
        }
    }
}

/// The linearized cumulative loss `θ ↦ Gᵀθ`.
impl super::ftpl::CumulativeLoss for CumulativeGradient {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn gradient(&self, _theta: &[f64]) -> Vec<f64> {
        self.0.clone()
    }
}

/// One lazy FTRL round with regularizer `‖θ‖²/(2η)`: `G ← G + g_t`,
/// returns `θ = −η·G`, the minimizer of the linearized cumulative loss.
///
/// ```
/// use ftnpl::learners::{ftrl_l2_step, CumulativeGradient};
///
/// let mut g = CumulativeGradient::zeros(2);
/// assert_eq!(ftrl_l2_step(&mut g, &[1.0, -1.0], 0.1), vec![-0.1, 0.1]);
/// ```
pub fn ftrl_l2_step(cumulative: &mut CumulativeGradient, round_gradient: &[f64], eta: f64) -> Vec<f64> {
    cumulative.accumulate(round_gradient);
    cumulative.0.iter().map(|g| -eta * g).collect()
}

/// Lazy FTRL centred at the initial strategy: `θ_t = θ_0 − η·Σ_{i<t} g_i`.
///
/// With the regularizer `‖θ − θ_0‖²/(2η)` the leader's strategy starts at
/// `θ_0` instead of the origin; for unconstrained strategies the iterates
/// coincide with online gradient descent from `θ_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FtrlL2 {
    center: Vec<f64>,
    cumulative: CumulativeGradient,
    eta: f64,
}

impl FtrlL2 {
    pub fn new(center: Vec<f64>, eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::config(format!("learning rate must be positive, got {eta}")));
        }
        let dim = center.len();
        Ok(FtrlL2 {
            center,
            cumulative: CumulativeGradient::zeros(dim),
            eta,
        })
    }

    /// Current leader strategy.
    pub fn params(&self) -> Vec<f64> {
        self.center
            .iter()
            .zip(self.cumulative.as_slice())
            .map(|(c, g)| c - self.eta * g)
            .collect()
    }

    pub fn observe(&mut self, round_gradient: &[f64]) -> Vec<f64> {
        self.cumulative.accumulate(round_gradient);
        self.params()
    }

    pub fn cumulative(&self) -> &CumulativeGradient {
        &self.cumulative
    }
}

/// Multiplicative weights: `μ'(k) ∝ μ(k)·exp(−η·u(k))`.
///
/// The shift by `min u` leaves the normalized result unchanged and keeps the
/// exponentials in range.
pub fn mw_step(mu: &SimplexStrategy, losses: &[f64], eta: f64) -> Result<SimplexStrategy> {
    if losses.len() != mu.len() {
        return Err(Error::precondition(format!(
            "{} losses for {} actions",
            losses.len(),
            mu.len()
        )));
    }
    if losses.iter().any(|u| !u.is_finite()) {
        return Err(Error::numeric("mw_step", "non-finite loss"));
    }
    let shift = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = mu
        .probs()
        .iter()
        .zip(losses)
        .map(|(p, u)| p * (-eta * (u - shift)).exp())
        .collect();
    if weights.iter().all(|&w| w == 0.0) {
        return Err(Error::numeric("mw_step", "all weights vanished"));
    }
    SimplexStrategy::normalized(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn no_signal_no_move() {
        let mut g = CumulativeGradient::zeros(2);
        assert_eq!(ftrl_l2_step(&mut g, &[0.0, 0.0], 0.3), vec![0.0, 0.0]);
    }

    #[test]
    fn opposite_gradients_cancel() {
        let mut g = CumulativeGradient::zeros(2);
        ftrl_l2_step(&mut g, &[0.4, -2.0], 0.1);
        assert_eq!(ftrl_l2_step(&mut g, &[-0.4, 2.0], 0.1), vec![0.0, 0.0]);
    }

    #[test]
    fn centred_ftrl_is_gradient_descent() {
        let mut f = FtrlL2::new(vec![1.0, 0.0], 0.5).unwrap();
        assert_eq!(f.params(), vec![1.0, 0.0]);
        assert_eq!(f.observe(&[1.0, 2.0]), vec![0.5, -1.0]);
        assert_eq!(f.observe(&[-1.0, 0.0]), vec![1.0, -1.0]);
        assert!(FtrlL2::new(vec![0.0], 0.0).is_err());
    }

    #[test]
    fn mw_fixed_points_and_hand_value() {
        let half = SimplexStrategy::uniform(2);
        assert_eq!(mw_step(&half, &[3.0, 3.0], 0.7).unwrap(), half);
        let skew = SimplexStrategy::new(vec![0.3, 0.7]).unwrap();
        assert_eq!(mw_step(&skew, &[1.0, -4.0], 0.0).unwrap(), skew);
        // weights ½·e^{−ln2} = ¼ and ½·1 = ½, normalized to (1/3, 2/3)
        let next = mw_step(&half, &[1.0, 0.0], std::f64::consts::LN_2).unwrap();
        assert!((next.probs()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((next.probs()[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn mw_rejects_bad_input() {
        let half = SimplexStrategy::uniform(2);
        assert!(mw_step(&half, &[1.0], 0.1).is_err());
        assert!(mw_step(&half, &[f64::NAN, 0.0], 0.1).is_err());
    }

    proptest! {
        #[test]
        fn mw_stays_on_the_simplex(p in 0.01f64..0.99, u0 in -50.0f64..50.0, u1 in -50.0f64..50.0, eta in 0.0f64..2.0) {
            let mu = SimplexStrategy::new(vec![p, 1.0 - p]).unwrap();
            let next = mw_step(&mu, &[u0, u1], eta).unwrap();
            let total: f64 = next.probs().iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            prop_assert!(next.probs().iter().all(|&x| x > 0.0));
        }
    }
}
