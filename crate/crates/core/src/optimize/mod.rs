//! Rollouts, fitness evaluation and the optimizers that train policies and
//! tune the static PID baseline.

pub mod de;
pub mod pso;
pub mod rollout;
pub mod train;

pub use de::{differential_evolution, DeConfig, DeOutcome};
pub use pso::{
    pso_optimize, pso_resume, pso_update, pso_update_with, random_search_init, write_learning_curve, Fitness,
    FitnessRecord, FnFitness, InitResult, Particle, PsoOutcome, Swarm, SwarmConfig, LEARNING_CURVE_HEADER,
};
pub use rollout::{evaluate, rollout, rollout_recorded, BoundAudit, EpisodeRecord, DIVERGED_EPISODE_REWARD};
pub use train::{
    de_tune_static_pid, train_policy, training_seed_base, PolicyFitness, StaticPidFitness, TrainedPolicy, TunedPid,
    TRAINING_SEED_OFFSET,
};
