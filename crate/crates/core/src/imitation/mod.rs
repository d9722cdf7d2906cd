//! Miniature adversarial imitation: a planar environment whose expert walks
//! circles, correlated rollouts driven by the mediator, and the FTNPL loop
//! between a policy and a Wasserstein-style discriminator.

mod env;
mod expert;
mod gail;
mod rollout;
mod update;

pub use env::{unit, CircleWorld, CircleWorldConfig, ACTION_DIM, HISTORY, OBS_DIM};
pub use expert::{expert_generate, write_trajectories_csv, ExpertMode, Trajectory};
pub use gail::{
    disc_batch, disc_input, disc_queue_gradient, ftnpl_gail_iteration, gail_disc_loss, run_circleworld, DiscNet,
    GailConfig, GailOutcome, GailState, GailStats,
};
pub use rollout::{
    correlated_rollout, mediator_code, mediator_input, policy_input, relabel_codes, PolicyNet, Rollout,
};
pub use update::{advantages, policy_update, reward_to_go, surrogate_gradient, SurrogateConfig, SurrogateSample};
