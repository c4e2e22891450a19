//! Episode rollouts and multi-episode fitness.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::control::{GainBounds, PidGainSet};
use crate::error::Result;
use crate::policy::Controller;
use crate::scenarios::{Scenario, ScenarioSet};
use crate::sim::trajectory::TrajectoryRow;
use crate::sim::{Env, EnvConfig};

static ACTIONS_CHECKED: AtomicU64 = AtomicU64::new(0);
static ACTION_VIOLATIONS: AtomicU64 = AtomicU64::new(0);
static GAINS_CHECKED: AtomicU64 = AtomicU64::new(0);
static GAIN_VIOLATIONS: AtomicU64 = AtomicU64::new(0);

/// Process-wide tally of controller outputs checked against their bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BoundAudit {
    pub actions_checked: u64,
    pub action_violations: u64,
    pub gains_checked: u64,
    pub gain_violations: u64,
}

impl BoundAudit {
    pub fn snapshot() -> Self {
        Self {
            actions_checked: ACTIONS_CHECKED.load(Ordering::Relaxed),
            action_violations: ACTION_VIOLATIONS.load(Ordering::Relaxed),
            gains_checked: GAINS_CHECKED.load(Ordering::Relaxed),
            gain_violations: GAIN_VIOLATIONS.load(Ordering::Relaxed),
        }
    }
}

/// Full record of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub total_reward: f64,
    /// `n_s + 1` rows; row 0 is the reset state.
    pub rows: Vec<TrajectoryRow>,
    /// Gains used at each decision; empty for controllers without a PID layer.
    pub gains: Vec<PidGainSet>,
}

fn run(
    ctrl: &dyn Controller,
    scenario: &Scenario,
    cfg: &EnvConfig,
    seed: u64,
    mut record: Option<&mut EpisodeRecord>,
) -> Result<f64> {
    let (mut env, mut obs) = Env::reset(scenario, cfg, seed)?;
    if let Some(rec) = record.as_deref_mut() {
        rec.rows.push(TrajectoryRow {
            step: 0,
            time_min: 0.0,
            state: *env.full_state(),
            measurement: obs.measured[0],
            setpoint: obs.setpoints[0],
            action: env.prev_action(),
            reward: 0.0,
        });
    }
    let bounds = GainBounds::default();
    let mut total = 0.0;
    let mut checked = 0u64;
    let mut bad_actions = 0u64;
    let mut gains_checked = 0u64;
    let mut bad_gains = 0u64;
    while !env.is_done() {
        let decision = ctrl.act(&obs, env.prev_action(), cfg.dt, &cfg.ranges)?;
        checked += 1;
        if !decision.action.within_bounds() {
            bad_actions += 1;
        }
        if let Some(g) = &decision.gains {
            gains_checked += 1;
            if !bounds.contains(g) {
                bad_gains += 1;
            }
        }
        let out = env.step(decision.action)?;
        total += out.reward;
        obs = out.observation;
        if let Some(rec) = record.as_deref_mut() {
            rec.rows.push(TrajectoryRow {
                step: env.step_index(),
                time_min: env.step_index() as f64 * cfg.dt,
                state: out.info.true_state,
                measurement: out.info.measurement,
                setpoint: out.info.setpoint,
                action: out.info.action,
                reward: out.reward,
            });
            if let Some(g) = decision.gains {
                rec.gains.push(g);
            }
        }
    }
    ACTIONS_CHECKED.fetch_add(checked, Ordering::Relaxed);
    ACTION_VIOLATIONS.fetch_add(bad_actions, Ordering::Relaxed);
    GAINS_CHECKED.fetch_add(gains_checked, Ordering::Relaxed);
    GAIN_VIOLATIONS.fetch_add(bad_gains, Ordering::Relaxed);
    Ok(total)
}

/// Undiscounted cumulative reward of one episode.
pub fn rollout(ctrl: &dyn Controller, scenario: &Scenario, cfg: &EnvConfig, seed: u64) -> Result<f64> {
    run(ctrl, scenario, cfg, seed, None)
}

/// Like [`rollout`] but keeps every state, action and gain.
pub fn rollout_recorded(
    ctrl: &dyn Controller,
    scenario: &Scenario,
    cfg: &EnvConfig,
    seed: u64,
) -> Result<EpisodeRecord> {
    let mut rec = EpisodeRecord {
        total_reward: 0.0,
        rows: Vec::with_capacity(scenario.n_s + 1),
        gains: Vec::with_capacity(scenario.n_s),
    };
    rec.total_reward = run(ctrl, scenario, cfg, seed, Some(&mut rec))?;
    Ok(rec)
}

/// Reward credited to a sub-episode whose simulation blew up. Far below any
/// episode the plant can physically produce, but finite so fitness values
/// stay serializable.
pub const DIVERGED_EPISODE_REWARD: f64 = -1.0e6;

/// Mean over `n_e` episodes of the reward summed across every sub-episode of
/// `set`. Episode `j` uses seed `seed_base + j` for all its sub-episodes.
/// Numerical failures score [`DIVERGED_EPISODE_REWARD`]; other errors propagate.
pub fn evaluate(ctrl: &dyn Controller, set: &ScenarioSet, n_e: usize, seed_base: u64, cfg: &EnvConfig) -> Result<f64> {
    if n_e == 0 {
        return Err(crate::Error::Config("n_e must be at least 1".into()));
    }
    let mut sum = 0.0;
    for j in 0..n_e {
        let seed = seed_base.wrapping_add(j as u64);
        for s in &set.scenarios {
            sum += match rollout(ctrl, s, cfg, seed) {
                Ok(r) => r,
                Err(e) if e.is_numerical() => DIVERGED_EPISODE_REWARD,
                Err(e) => return Err(e),
            };
        }
    }
    Ok(sum / n_e as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::PidGainSet;
    use crate::policy::{AgentKind, PolicyParams, StaticPid};
    use crate::scenarios::{test_scenario, training_set, SetpointSchedule};
    use crate::sim::{Action, CstrParams, FullState, NoiseConfig};

    #[test]
    fn rollout_is_deterministic() {
        let s = test_scenario();
        let cfg = EnvConfig::default();
        let pid = StaticPid {
            gains: PidGainSet::REFERENCE,
        };
        let a = rollout(&pid, &s, &cfg, 4).unwrap();
        let b = rollout(&pid, &s, &cfg, 4).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let rec = rollout_recorded(&pid, &s, &cfg, 4).unwrap();
        assert_eq!(rec.total_reward.to_bits(), a.to_bits());
        assert_eq!(rec.rows.len(), 121);
        assert_eq!(rec.gains.len(), 120);
    }

    #[test]
    fn fixed_point_policy_at_steady_state_costs_nothing() {
        // No chemistry, balanced flow, zero-noise setpoint at the initial state.
        let params = CstrParams {
            k_a: 0.0,
            k_b: 0.0,
            t_f: 327.0,
            ..CstrParams::default()
        };
        let cfg = EnvConfig {
            params,
            initial_state: FullState::new(0.0, 0.0, 0.0, 327.0, 100.0),
            initial_action: Action::new(327.0, 100.0),
            ..EnvConfig::default()
        };
        let s = Scenario::tracking("flat", SetpointSchedule::equal_plateaus(&[0.0], 100.0, 120))
            .with_noise(NoiseConfig::none());
        let pid = StaticPid {
            gains: PidGainSet::REFERENCE,
        };
        assert_eq!(rollout(&pid, &s, &cfg, 0).unwrap(), 0.0);
    }

    #[test]
    fn single_episode_evaluation_equals_rollout() {
        let s = test_scenario();
        let cfg = EnvConfig::default();
        let p = PolicyParams::zeros(AgentKind::Cirl);
        let r = rollout(&p, &s, &cfg, 9).unwrap();
        let f = evaluate(&p, &ScenarioSet::single(s), 1, 9, &cfg).unwrap();
        assert_eq!(r, f);
    }

    #[test]
    fn silent_episodes_are_identical() {
        let set = training_set().map(|s| s.with_noise(NoiseConfig::none()));
        let cfg = EnvConfig::default();
        let pid = StaticPid {
            gains: PidGainSet::REFERENCE,
        };
        let one = evaluate(&pid, &set, 1, 0, &cfg).unwrap();
        let three = evaluate(&pid, &set, 3, 100, &cfg).unwrap();
        assert!((one - three).abs() <= 1e-12 * one.abs());
    }

    #[test]
    fn training_fitness_decomposes_into_sub_episodes() {
        let set = training_set();
        let cfg = EnvConfig::default();
        let pid = StaticPid {
            gains: PidGainSet::REFERENCE,
        };
        let total = evaluate(&pid, &set, 1, 21, &cfg).unwrap();
        let parts: f64 = set.scenarios.iter().map(|s| rollout(&pid, s, &cfg, 21).unwrap()).sum();
        assert_eq!(total, parts);
    }

    #[test]
    fn diverged_sub_episode_scores_the_penalty() {
        let sound = test_scenario();
        let doomed = test_scenario().with_feed_step(1, 1e300);
        assert!(rollout(
            &StaticPid {
                gains: PidGainSet::REFERENCE
            },
            &doomed,
            &EnvConfig::default(),
            0
        )
        .unwrap_err()
        .is_numerical());
        let pid = StaticPid {
            gains: PidGainSet::REFERENCE,
        };
        let cfg = EnvConfig::default();
        let base = rollout(&pid, &sound, &cfg, 3).unwrap();
        let f = evaluate(&pid, &ScenarioSet::new("mixed", vec![sound, doomed]), 1, 3, &cfg).unwrap();
        assert_eq!(f, base + DIVERGED_EPISODE_REWARD);
    }
}
