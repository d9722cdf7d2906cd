use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `(‖μ_t − μ_{t−1}‖², ‖μ_t − μ*‖)` over the concatenated strategies.
pub fn step_metrics(current: &[f64], previous: &[f64], mne: Option<&[f64]>) -> (f64, Option<f64>) {
    let step = current
        .iter()
        .zip(previous)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    (step, mne.map(|m| euclidean(current, m)))
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    euclidean(a, b)
}

/// Shannon entropy of a mixture.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

/// Cross-entropy `H(μ*, μ)` and divergence `D_KL(μ*‖μ)`, each summed over
/// the two players.
pub fn cross_entropy_and_kl(
    mne_agent: &[f64],
    mne_disc: &[f64],
    agent: &[f64],
    disc: &[f64],
) -> Result<(f64, f64)> {
    let mut h = 0.0;
    let mut kl = 0.0;
    for (target, mix) in [(mne_agent, agent), (mne_disc, disc)] {
        if target.len() != mix.len() {
            return Err(Error::precondition("mixtures of different sizes"));
        }
        for (&p, &q) in target.iter().zip(mix) {
            if p == 0.0 {
                continue;
            }
            if !(q > 0.0) {
                return Err(Error::numeric("cross_entropy", "zero probability under the equilibrium's support"));
            }
            h -= p * q.ln();
            kl += p * (p / q).ln();
        }
    }
    Ok((h, kl))
}

/// Arithmetic mean of the strategy vectors in a history.
pub fn time_average(history: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = history
        .first()
        .ok_or_else(|| Error::precondition("time average of an empty history"))?;
    let mut acc = vec![0.0; first.len()];
    for h in history {
        for (a, x) in acc.iter_mut().zip(h) {
            *a += x;
        }
    }
    let n = history.len() as f64;
    Ok(acc.into_iter().map(|a| a / n).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Every iterate of the final window is within ε of the equilibrium.
    LastIterate,
    /// Only the time average is within ε.
    WeakOnly,
    Diverged,
}

/// Classifies a trajectory of concatenated strategies against `mne`.
pub fn convergence_verdict(states: &[Vec<f64>], mne: Option<&[f64]>, eps: f64, window: usize) -> Result<Verdict> {
    let mne = mne.ok_or_else(|| Error::Unavailable("verdict needs an equilibrium reference".into()))?;
    if window == 0 || window > states.len() {
        return Err(Error::precondition(format!(
            "window {window} does not fit a trajectory of {} steps",
            states.len()
        )));
    }
    let tail = &states[states.len() - window..];
    if tail.iter().all(|s| euclidean(s, mne) < eps) {
        return Ok(Verdict::LastIterate);
    }
    if euclidean(&time_average(states)?, mne) < eps {
        Ok(Verdict::WeakOnly)
    } else {
        Ok(Verdict::Diverged)
    }
}

/// Rotation content of a planar trajectory around `center`, in `[0, 1]`.
///
/// Each displacement is split into its component tangential to the circle
/// through the previous point; the score is the magnitude of the summed
/// signed tangential motion over the total path length. Pure rotation scores
/// close to 1, radial motion 0, and back-and-forth jitter cancels.
pub fn cycle_score(points: &[[f64; 2]], center: [f64; 2]) -> f64 {
    let mut tangential = 0.0;
    let mut path = 0.0;
    for w in points.windows(2) {
        let (rx, ry) = (w[0][0] - center[0], w[0][1] - center[1]);
        let (dx, dy) = (w[1][0] - w[0][0], w[1][1] - w[0][1]);
        let r = (rx * rx + ry * ry).sqrt();
        let len = (dx * dx + dy * dy).sqrt();
        path += len;
        if r > 0.0 {
            tangential += (rx * dy - ry * dx) / r;
        }
    }
    if path == 0.0 {
        return 0.0;
    }
    (tangential.abs() / path).clamp(0.0, 1.0)
}

/// Population standard deviation of every length-`window` slice.
pub fn rolling_std(series: &[f64], window: usize) -> Vec<f64> {
    if window == 0 || window > series.len() {
        return Vec::new();
    }
    series
        .windows(window)
        .map(|w| {
            let m = w.iter().sum::<f64>() / window as f64;
            (w.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / window as f64).sqrt()
        })
        .collect()
}

/// Least-squares slope of `ys` against `0, 1, 2, …`.
pub fn trend_slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    if ys.len() < 2 {
        return 0.0;
    }
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    sxy / sxx
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
