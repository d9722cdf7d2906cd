//! Runs the book chapters as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/running.md")]
pub mod running {}
#[doc = include_str!("../../../book/src/games.md")]
pub mod games {}
#[doc = include_str!("../../../book/src/learners.md")]
pub mod learners {}
#[doc = include_str!("../../../book/src/mediator.md")]
pub mod mediator {}
#[doc = include_str!("../../../book/src/analytics.md")]
pub mod analytics {}
#[doc = include_str!("../../../book/src/toygan.md")]
pub mod toygan {}
#[doc = include_str!("../../../book/src/imitation.md")]
pub mod imitation {}
