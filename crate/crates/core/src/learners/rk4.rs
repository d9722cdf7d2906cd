use crate::error::{ensure_finite, Error, Result};

/// Largest tolerated mass drift of a probability group in one step.
pub const SIMPLEX_DRIFT_LIMIT: f64 = 1e-6;

/// States of an integrated flow sampled every `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowTrajectory {
    pub h: f64,
    /// `states[k]` is the state at time `k·h`.
    pub states: Vec<Vec<f64>>,
    /// Largest `|Σ μ − 1|` over the probability groups in step `k`, measured
    /// before renormalization. Empty when no groups were given.
    pub drift: Vec<f64>,
}

impl FlowTrajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn max_drift(&self) -> f64 {
        self.drift.iter().copied().fold(0.0, f64::max)
    }
}

/// One classical Runge–Kutta step.
pub fn rk4_step<F>(rhs: &mut F, y: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let shifted = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let k1 = rhs(y)?;
    let k2 = rhs(&shifted(y, &k1, h / 2.0))?;
    let k3 = rhs(&shifted(y, &k2, h / 2.0))?;
    let k4 = rhs(&shifted(y, &k3, h))?;
    let next: Vec<f64> = (0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    ensure_finite("rk4_step", &next)?;
    Ok(next)
}

/// Integrates `ẏ = rhs(y)` for `steps` steps of size `h`.
///
/// `simplex_groups` lists the sizes of consecutive blocks of `y` that are
/// probability vectors; each block is renormalized after every step and the
/// pre-normalization drift is recorded. A drift above
/// [`SIMPLEX_DRIFT_LIMIT`] is an error.
pub fn rk4_integrate<F>(mut rhs: F, y0: &[f64], h: f64, steps: usize, simplex_groups: &[usize]) -> Result<FlowTrajectory>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if !(h > 0.0) {
        return Err(Error::config(format!("step size must be positive, got {h}")));
    }
    if simplex_groups.iter().sum::<usize>() > y0.len() {
        return Err(Error::config("simplex groups exceed the state dimension"));
    }
    let mut states = Vec::with_capacity(steps + 1);
    let mut drift = Vec::with_capacity(if simplex_groups.is_empty() { 0 } else { steps });
    states.push(y0.to_vec());
    let mut y = y0.to_vec();
    for step in 0..steps {
        y = rk4_step(&mut rhs, &y, h)?;
        if !simplex_groups.is_empty() {
            let mut worst = 0.0f64;
            let mut start = 0;
            for &len in simplex_groups {
                let block = &mut y[start..start + len];
                let total: f64 = block.iter().sum();
                worst = worst.max((total - 1.0).abs());
                if block.iter().any(|&p| p < -SIMPLEX_DRIFT_LIMIT) {
                    return Err(Error::numeric("rk4_integrate", format!("negative probability at step {step}")));
                }
                for p in block.iter_mut() {
                    *p /= total;
                }
                start += len;
            }
            if worst > SIMPLEX_DRIFT_LIMIT {
                return Err(Error::numeric(
                    "rk4_integrate",
                    format!("state left the simplex by {worst:e} at step {step}"),
                ));
            }
            drift.push(worst);
        }
        states.push(y.clone());
    }
    Ok(FlowTrajectory { h, states, drift })
}
