//! Episode-level environment: reset, step, reward and observation history.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenarios::{Scenario, Setpoint};

use super::integrator::{integrate_step, CONTROL_DT, DEFAULT_SUBSTEPS};
use super::model::{Action, CstrParams, FullState};
use super::noise::{observe, Measurement};
use super::ranges::Ranges;

/// History depth of the observation (t, t-1, t-2).
pub const HISTORY: usize = 3;

/// Three-step history of measurements and setpoints; index 0 is the latest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub measured: [Measurement; HISTORY],
    pub setpoints: [Setpoint; HISTORY],
}

impl Observation {
    /// History with every slot holding the same values.
    pub fn filled(m: Measurement, sp: Setpoint) -> Self {
        Self {
            measured: [m; HISTORY],
            setpoints: [sp; HISTORY],
        }
    }

    fn push(&mut self, m: Measurement, sp: Setpoint) {
        self.measured.rotate_right(1);
        self.setpoints.rotate_right(1);
        self.measured[0] = m;
        self.setpoints[0] = sp;
    }
}

/// Diagonal weights on normalized [C_B, V] errors and normalized [T_c, F_in] moves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights {
    pub q: [f64; 2],
    pub r: [f64; 2],
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            q: [1.0, 1.0],
            r: [0.0, 0.0],
        }
    }
}

/// `-(eᵀQe + duᵀR du)` with diagonal Q and R.
pub fn reward(e: &[f64; 2], du: &[f64; 2], w: &RewardWeights) -> f64 {
    let tracking: f64 = (0..2).map(|i| w.q[i] * e[i] * e[i]).sum();
    let effort: f64 = (0..2).map(|i| w.r[i] * du[i] * du[i]).sum();
    -(tracking + effort)
}

/// Plant settings shared by every episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub params: CstrParams,
    pub dt: f64,
    pub substeps: usize,
    pub initial_state: FullState,
    pub initial_action: Action,
    pub ranges: Ranges,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            params: CstrParams::default(),
            dt: CONTROL_DT,
            substeps: DEFAULT_SUBSTEPS,
            initial_state: FullState::initial(),
            initial_action: Action::midpoint(),
            ranges: Ranges::default(),
        }
    }
}

/// Ground truth reported alongside each transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub true_state: FullState,
    pub measurement: Measurement,
    pub setpoint: Setpoint,
    pub action: Action,
    pub c_a_in: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// A running episode. Owns its random stream; borrows its scenario.
#[derive(Debug, Clone)]
pub struct Env<'a> {
    scenario: &'a Scenario,
    config: &'a EnvConfig,
    full_state: FullState,
    history: Observation,
    prev_action: Action,
    step_index: usize,
    rng: ChaCha8Rng,
    seed: u64,
}

impl<'a> Env<'a> {
    /// Starts an episode at the configured initial state.
    pub fn reset(scenario: &'a Scenario, config: &'a EnvConfig, seed: u64) -> Result<(Self, Observation)> {
        scenario.validate()?;
        config.params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let full_state = config.initial_state;
        let m = observe(&full_state, &scenario.noise, &mut rng);
        let history = Observation::filled(m, scenario.setpoint_at(0)?);
        let env = Self {
            scenario,
            config,
            full_state,
            history,
            prev_action: config.initial_action,
            step_index: 0,
            rng,
            seed,
        };
        Ok((env, history))
    }

    pub fn step(&mut self, u: Action) -> Result<StepOutcome> {
        let n_s = self.scenario.n_s;
        if self.step_index >= n_s {
            return Err(Error::Protocol(format!(
                "episode of scenario '{}' already finished after {n_s} steps",
                self.scenario.id
            )));
        }
        let u = u.clamp();
        let c_a_in = self.scenario.feed_at(self.step_index);
        let cfg = self.config;
        let next = integrate_step(&self.full_state, &u, cfg.dt, cfg.substeps, &cfg.params, c_a_in).map_err(|e| {
            Error::Episode {
                scenario: self.scenario.id.clone(),
                seed: self.seed,
                step: self.step_index,
                source: Box::new(e),
            }
        })?;
        let m = observe(&next, &self.scenario.noise, &mut self.rng);
        let k = self.step_index + 1;
        // The final transition has no next setpoint; it keeps the last one.
        let sp = self.scenario.setpoint_at(k.min(n_s - 1))?;
        self.history.push(m, sp);

        let r = &cfg.ranges;
        let e = [(sp.c_b - next.c_b) / r.c_b.width(), (sp.vol - next.vol) / r.vol.width()];
        let du = [
            (u.t_c - self.prev_action.t_c) / r.t_c.width(),
            (u.f_in - self.prev_action.f_in) / r.f_in.width(),
        ];
        let rew = reward(&e, &du, &self.scenario.weights);

        self.full_state = next;
        self.prev_action = u;
        self.step_index = k;
        Ok(StepOutcome {
            observation: self.history,
            reward: rew,
            done: k == n_s,
            info: StepInfo {
                true_state: next,
                measurement: m,
                setpoint: sp,
                action: u,
                c_a_in,
            },
        })
    }

    pub fn observation(&self) -> &Observation {
        &self.history
    }

    pub fn full_state(&self) -> &FullState {
        &self.full_state
    }

    pub fn prev_action(&self) -> Action {
        self.prev_action
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn is_done(&self) -> bool {
        self.step_index >= self.scenario.n_s
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    pub fn config(&self) -> &EnvConfig {
        self.config
    }
}
