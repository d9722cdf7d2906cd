//! Trajectory logs and convergence diagnostics.

mod log;
mod metrics;

pub use log::{RegretPoint, RunSummary, TrajectoryLog, TrajectoryRow};
pub use metrics::{
    convergence_verdict, cross_entropy_and_kl, cycle_score, distance, entropy, median, rolling_std, step_metrics,
    time_average, trend_slope, Verdict,
};
