//! Control-informed reinforcement learning on a simulated CSTR.
//!
//! A small neural network schedules the gains of a two-loop velocity-form
//! PID controller; the network is trained gradient-free with random search
//! followed by particle swarm optimization. A pure neural policy and a
//! statically tuned PID serve as baselines.

// `!(a <= b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod error;
pub mod optimize;
pub mod policy;
pub mod scenarios;
pub mod sim;

pub use error::{Error, Result};
