//! Experiment runners: each game paired with each learner, plus the
//! configuration, artifact writing and multi-seed sweeps behind the CLI.

mod ftnpl;
mod pennies;
mod replicator;
mod toygan;

pub use ftnpl::{FtnplConfig, Mediator};
pub use pennies::{agent_gradient, disc_gradient, regret_curve, run_pennies, PenniesLearner, PenniesOptions, PenniesOutcome, UpdateOrder};
pub use replicator::{run_mw, run_replicator_flow, FlowOutcome, MwOutcome, ReplicatorOptions};
pub use toygan::{run_toygan, GanLearner, GanOptions, GanOutcome, GanRow};
