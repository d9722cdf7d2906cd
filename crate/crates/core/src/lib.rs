//! Game-dynamics laboratory for follow-the-neurally-perturbed-leader (FTNPL).
//!
//! Two players repeatedly update their strategies against each other while a
//! small stochastic network, the mediator, emits correlated codes that
//! perturb the game. The crate contains the baselines FTNPL is compared
//! against (FTRL, FTPL, multiplicative weights and its replicator flow),
//! the games used to compare them, diagnostics that separate time-average
//! from last-iterate convergence, and a miniature adversarial imitation
//! learning setup.

// NaN must fail these validity checks, so `!(x > 0.0)` is deliberate
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod games;
pub mod imitation;
pub mod learners;
pub mod mediator;
pub mod numerics;

pub use error::{Error, Result};
