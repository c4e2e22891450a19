//! Neural policies: the CIRL head (network → PID gains → PID step) and the
//! pure-RL head (network → controls).

mod agent;
mod mlp;
pub mod persist;

pub use agent::{
    build_observation_vector, cirl_act, cirl_gains, purerl_act, AgentKind, Controller, Decision, PolicyParams,
    StaticPid, OBS_WIDTH,
};
pub use mlp::{mlp_forward, MlpLayout};
pub use persist::{content_hash, pack, unpack, GainFile, PolicyFile, PolicyMetadata};
