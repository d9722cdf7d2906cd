//! The mediator: a small stochastic network that emits correlated codes
//! and learns, by score-function gradient, to suppress the players'
//! incentives to switch between their recent strategies.

mod policy;
mod reward;

pub use policy::{emit_code, mediator_update, CodeMode, MediatorInfo, MediatorPolicy, RewardBaseline, ScoreSample};
pub use reward::{marginal_gains, mediator_reward, GainMatrices, Penalty};
