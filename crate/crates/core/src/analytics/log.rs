use std::io::Write;

use serde::{Deserialize, Serialize};

use super::metrics::Verdict;
use crate::error::{Error, Result};

/// One step of a run.
///
/// `phi` and `omega` hold the two plotted coordinates of each player. For
/// the pennies games these are the strategies themselves; network games log
/// a two-number projection chosen by the experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub t: u64,
    pub phi: [f64; 2],
    pub omega: [f64; 2],
    pub code: Vec<f64>,
    pub loss_pi: f64,
    pub loss_d: f64,
    pub r_m: f64,
    pub step_norm_sq: f64,
    pub dist_mne: Option<f64>,
}

/// Append-only per-step record of a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryLog {
    code_size: usize,
    rows: Vec<TrajectoryRow>,
}

impl TrajectoryLog {
    pub fn new(code_size: usize) -> Self {
        TrajectoryLog {
            code_size,
            rows: Vec::new(),
        }
    }

    pub fn code_size(&self) -> usize {
        self.code_size
    }

    /// Column names, `c_0 … c_{C−1}` included.
    pub fn header(code_size: usize) -> Vec<String> {
        let mut h: Vec<String> = ["t", "phi_0", "phi_1", "omega_0", "omega_1"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        h.extend((0..code_size).map(|i| format!("c_{i}")));
        h.extend(
            ["loss_pi", "loss_D", "r_m", "step_norm_sq", "dist_mne"]
                .iter()
                .map(|s| s.to_string()),
        );
        h
    }

    pub fn push(&mut self, row: TrajectoryRow) -> Result<()> {
        if row.code.len() != self.code_size {
            return Err(Error::precondition(format!(
                "row has {} code entries, log expects {}",
                row.code.len(),
                self.code_size
            )));
        }
        if let Some(last) = self.rows.last() {
            if row.t <= last.t {
                return Err(Error::precondition(format!("step {} logged after step {}", row.t, last.t)));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[TrajectoryRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Concatenated `(φ, ω)` per row.
    pub fn states(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| vec![r.phi[0], r.phi[1], r.omega[0], r.omega[1]])
            .collect()
    }

    /// The `(φ[0], ω[0])` projection used by the cycle score.
    pub fn plane(&self) -> Vec<[f64; 2]> {
        self.rows.iter().map(|r| [r.phi[0], r.omega[0]]).collect()
    }

    pub fn step_norms(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.step_norm_sq).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::header(self.code_size))?;
        for r in &self.rows {
            let mut rec = vec![
                r.t.to_string(),
                r.phi[0].to_string(),
                r.phi[1].to_string(),
                r.omega[0].to_string(),
                r.omega[1].to_string(),
            ];
            rec.extend(r.code.iter().map(f64::to_string));
            rec.push(r.loss_pi.to_string());
            rec.push(r.loss_d.to_string());
            rec.push(r.r_m.to_string());
            rec.push(r.step_norm_sq.to_string());
            rec.push(r.dist_mne.map(|d| d.to_string()).unwrap_or_default());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-round external regret of both players.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretPoint {
    pub t: u64,
    pub agent: f64,
    pub discriminator: f64,
}

/// Post-hoc digest of a run, written as JSON.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: u64,
    pub final_distance: Option<f64>,
    pub min_distance: Option<f64>,
    pub time_average_distance: Option<f64>,
    pub regret: Vec<RegretPoint>,
    pub cycle_score: Option<f64>,
    pub verdict: Option<Verdict>,
    /// Experiment-specific scalars, such as generated-sample moments.
    #[serde(default)]
    pub extra: std::collections::BTreeMap<String, f64>,
}
