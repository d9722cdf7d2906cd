//! No-regret updaters: FTRL, multiplicative weights and its replicator
//! flow, FTPL, the queue-based follow-the-leader step, and regret.

mod ftl;
mod ftpl;
mod ftrl;
mod queue;
mod regret;
mod replicator;
mod rk4;

pub use ftl::{ftl_queue_step, pennies_queue_step, queue_gradient, Role};
pub use ftpl::{ftpl_step, CumulativeLoss, FtplConfig};
pub use ftrl::{ftrl_l2_step, mw_step, CumulativeGradient, FtrlL2};
pub use queue::HistoryQueue;
pub use regret::{discrete_regret, mw_self_play, pennies_regret, MixedPlay};
pub use replicator::replicator_rhs;
pub use rk4::{rk4_integrate, rk4_step, FlowTrajectory, SIMPLEX_DRIFT_LIMIT};
