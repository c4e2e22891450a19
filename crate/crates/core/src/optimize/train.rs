//! Glue between the optimizers and the environment: policy and static-PID
//! fitness functions and the training/tuning entry points.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::control::{GainBounds, PidGainSet};
use crate::error::{Error, Result};
use crate::policy::{AgentKind, MlpLayout, PolicyParams, StaticPid};
use crate::scenarios::ScenarioSet;
use crate::sim::EnvConfig;

use super::de::{differential_evolution, DeConfig, DeOutcome};
use super::pso::{pso_optimize, Fitness, PsoOutcome, SwarmConfig};
use super::rollout::evaluate;

/// Training noise seeds start here so they never overlap small evaluation seeds.
pub const TRAINING_SEED_OFFSET: u64 = 1_000_000;

/// Seed of the first training episode for optimizer seed `seed`.
pub fn training_seed_base(seed: u64, n_e: usize) -> u64 {
    TRAINING_SEED_OFFSET + seed.wrapping_mul(n_e as u64)
}

/// Fitness of a flat network parameter vector on a scenario set.
pub struct PolicyFitness<'a> {
    pub kind: AgentKind,
    pub layout: MlpLayout,
    pub set: &'a ScenarioSet,
    pub env: &'a EnvConfig,
    pub n_e: usize,
    pub seed_base: u64,
    episodes: AtomicU64,
}

impl<'a> PolicyFitness<'a> {
    pub fn new(kind: AgentKind, set: &'a ScenarioSet, env: &'a EnvConfig, n_e: usize, seed_base: u64) -> Self {
        Self {
            kind,
            layout: kind.default_layout(),
            set,
            env,
            n_e,
            seed_base,
            episodes: AtomicU64::new(0),
        }
    }

    /// Sub-episode rollouts performed so far.
    pub fn episodes(&self) -> u64 {
        self.episodes.load(Ordering::Relaxed)
    }
}

impl Fitness for PolicyFitness<'_> {
    fn dim(&self) -> usize {
        self.layout.param_count()
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let policy = PolicyParams::new(self.kind, self.layout.clone(), x.to_vec())?;
        self.episodes
            .fetch_add((self.n_e * self.set.len()) as u64, Ordering::Relaxed);
        evaluate(&policy, self.set, self.n_e, self.seed_base, self.env)
    }
}

/// Fitness of a static gain vector ordered as [`PidGainSet::to_array`].
pub struct StaticPidFitness<'a> {
    pub set: &'a ScenarioSet,
    pub env: &'a EnvConfig,
    pub n_e: usize,
    pub seed_base: u64,
}

impl Fitness for StaticPidFitness<'_> {
    fn dim(&self) -> usize {
        6
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let g: [f64; 6] = x.try_into().map_err(|_| Error::Shape {
            expected: 6,
            actual: x.len(),
        })?;
        let pid = StaticPid {
            gains: PidGainSet::from_array(g),
        };
        evaluate(&pid, self.set, self.n_e, self.seed_base, self.env)
    }
}

#[derive(Debug, Clone)]
pub struct TrainedPolicy {
    pub policy: PolicyParams,
    pub outcome: PsoOutcome,
    pub episodes: u64,
}

/// Random search + PSO over the network parameters of `kind`.
pub fn train_policy(kind: AgentKind, set: &ScenarioSet, cfg: &SwarmConfig, env: &EnvConfig) -> Result<TrainedPolicy> {
    set.validate()?;
    cfg.validate()?;
    if let Some(s) = set.scenarios.iter().find(|s| s.n_s != cfg.n_steps) {
        return Err(Error::Config(format!(
            "scenario '{}' has {} steps but the swarm config expects {}",
            s.id, s.n_s, cfg.n_steps
        )));
    }
    let fitness = PolicyFitness::new(
        kind,
        set,
        env,
        cfg.n_episodes,
        training_seed_base(cfg.seed, cfg.n_episodes),
    );
    let outcome = pso_optimize(cfg, &fitness)?;
    let policy = PolicyParams::new(kind, kind.default_layout(), outcome.best.clone())?;
    Ok(TrainedPolicy {
        policy,
        outcome,
        episodes: fitness.episodes(),
    })
}

#[derive(Debug, Clone)]
pub struct TunedPid {
    pub gains: PidGainSet,
    pub fitness: f64,
    pub outcome: DeOutcome,
}

/// Differential evolution over the six static gains within `bounds`, scored
/// with the same episode fitness as policy training.
pub fn de_tune_static_pid(
    bounds: &GainBounds,
    set: &ScenarioSet,
    cfg: &DeConfig,
    n_e: usize,
    env: &EnvConfig,
) -> Result<TunedPid> {
    set.validate()?;
    let fitness = StaticPidFitness {
        set,
        env,
        n_e,
        seed_base: training_seed_base(cfg.seed, n_e),
    };
    let outcome = differential_evolution(&bounds.spans(), cfg, &fitness)?;
    let gains = PidGainSet::from_array(outcome.best.clone().try_into().expect("six gains"));
    Ok(TunedPid {
        gains,
        fitness: outcome.best_fitness,
        outcome,
    })
}
