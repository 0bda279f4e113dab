//! Zeroth-order supervised policy improvement (ZOSPI) for continuous control.
//!
//! The policy is improved by sampling candidate actions around its current output (local
//! set) and uniformly over the action box (global set), scoring every candidate with the
//! learned critic, and regressing the policy onto the best one. The crate contains:
//!
//! - [`nn`]: dense networks, backpropagation, Adam, Polyak averaging, `.zckpt` checkpoints.
//! - [`zeroth_order`]: local/global samplers, best-candidate selection, the restart-based
//!   consistent-iteration optimizer, sampling-easy test functions and range sweeps.
//! - [`envs`]: the Four-Solution-Maze and a one-step multimodal bandit.
//! - [`agent`]: replay buffer, double-Q critics, the ZOSPI and DPG policy updates and the
//!   training loop.
//! - [`bootstrap_ucb`]: bootstrapped critic ensembles with upper-confidence scoring.
//! - [`experiments`]: config files, recipes, CSV/JSON artifacts and run summaries.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod bootstrap_ucb;
pub mod envs;
pub mod error;
pub mod experiments;
pub mod nn;
pub mod rng;
pub mod zeroth_order;

pub use error::{Error, Result};
