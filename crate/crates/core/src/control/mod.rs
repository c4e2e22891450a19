//! PID layer and loop-pairing analysis.

pub mod pid;
pub mod rga;

pub use pid::{
    error_histories, pid_apply, pid_deltas, pid_velocity_delta, write_gain_csv, ErrorHistory, GainBounds, LoopBounds,
    LoopGains, PidGainSet, GAIN_TRAJECTORY_HEADER, TAU_I_FLOOR,
};
pub use rga::{rga, steady_state_gain_matrix, GainProbe, Matrix2, Pairing};
