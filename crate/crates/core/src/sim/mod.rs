//! Reactor simulation: model, integrator, measurement noise and the episode
//! environment.

mod env;
mod integrator;
mod model;
mod noise;
mod ranges;
pub mod trajectory;

pub use env::{reward, Env, EnvConfig, Observation, RewardWeights, StepInfo, StepOutcome, HISTORY};
pub use integrator::{integrate_step, CONTROL_DT, DEFAULT_SUBSTEPS};
pub use model::{cstr_rhs, reaction_rates, Action, CstrParams, FullState};
pub use noise::{observe, Measurement, NoiseConfig};
pub use ranges::{Ranges, Span};

pub(crate) use model::saturate;
