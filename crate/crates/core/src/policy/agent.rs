//! Agent heads that turn an observation into an action.

use serde::{Deserialize, Serialize};

use crate::control::{error_histories, pid_apply, pid_deltas, GainBounds, PidGainSet};
use crate::error::{Error, Result};
use crate::sim::{saturate, Action, Observation, Ranges, Span, HISTORY};

use super::mlp::{mlp_forward, MlpLayout};

/// Network input width: 9 measured values plus 3 C_B setpoints.
pub const OBS_WIDTH: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    /// Network emits PID gains for the embedded PID layer.
    Cirl,
    /// Network emits the two controls directly.
    PureRl,
}

impl AgentKind {
    pub fn default_layout(self) -> MlpLayout {
        match self {
            AgentKind::Cirl => MlpLayout::cirl(),
            AgentKind::PureRl => MlpLayout::pure_rl(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AgentKind::Cirl => "cirl",
            AgentKind::PureRl => "rl",
        }
    }
}

/// Flat network parameters with their layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub kind: AgentKind,
    pub layout: MlpLayout,
    pub params: Vec<f64>,
}

impl PolicyParams {
    pub fn new(kind: AgentKind, layout: MlpLayout, params: Vec<f64>) -> Result<Self> {
        let expected = layout.param_count();
        let out = match kind {
            AgentKind::Cirl => 6,
            AgentKind::PureRl => 2,
        };
        if layout.output != out {
            return Err(Error::Shape {
                expected: out,
                actual: layout.output,
            });
        }
        if layout.input != OBS_WIDTH {
            return Err(Error::Shape {
                expected: OBS_WIDTH,
                actual: layout.input,
            });
        }
        if params.len() != expected {
            return Err(Error::Shape {
                expected,
                actual: params.len(),
            });
        }
        Ok(Self { kind, layout, params })
    }

    pub fn zeros(kind: AgentKind) -> Self {
        let layout = kind.default_layout();
        let n = layout.param_count();
        Self {
            kind,
            layout,
            params: vec![0.0; n],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.params
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        mlp_forward(&self.layout, &self.params, x)
    }
}

/// Min-max scaled network input: `[C_B, T, V]` at t, t-1, t-2, then C_B* at t, t-1, t-2.
///
/// The volume setpoint is constant in every scenario and only enters the PID error.
pub fn build_observation_vector(obs: &Observation, ranges: &Ranges) -> [f64; OBS_WIDTH] {
    let mut x = [0.0; OBS_WIDTH];
    for k in 0..HISTORY {
        let m = &obs.measured[k];
        x[3 * k] = ranges.c_b.normalize(m.c_b);
        x[3 * k + 1] = ranges.temp.normalize(m.temp);
        x[3 * k + 2] = ranges.vol.normalize(m.vol);
        x[9 + k] = ranges.c_b.normalize(obs.setpoints[k].c_b);
    }
    x
}

/// Maps a raw output onto `span` (−1 → lo, +1 → hi) and clamps.
#[inline]
fn squash(raw: f64, span: &Span) -> f64 {
    saturate(span.lo + 0.5 * (raw + 1.0) * span.width(), span.lo, span.hi)
}

/// Gains scheduled by the network for this observation.
pub fn cirl_gains(p: &PolicyParams, obs: &Observation, ranges: &Ranges, bounds: &GainBounds) -> Result<PidGainSet> {
    if p.kind != AgentKind::Cirl {
        return Err(Error::Config("cirl head called with a pure-RL policy".into()));
    }
    let raw = p.forward(&build_observation_vector(obs, ranges))?;
    let spans = bounds.spans();
    Ok(PidGainSet::from_array(std::array::from_fn(|i| {
        squash(raw[i], &spans[i])
    })))
}

/// Gains from the network, then one velocity-form PID step from `prev_u`.
pub fn cirl_act(
    p: &PolicyParams,
    obs: &Observation,
    prev_u: Action,
    dt: f64,
    ranges: &Ranges,
    bounds: &GainBounds,
) -> Result<(PidGainSet, Action)> {
    let gains = cirl_gains(p, obs, ranges, bounds)?;
    let errors = error_histories(obs, ranges);
    let u = pid_apply(prev_u, pid_deltas(&gains, &errors, dt), ranges);
    Ok((gains, u))
}

pub fn purerl_act(p: &PolicyParams, obs: &Observation, ranges: &Ranges) -> Result<Action> {
    if p.kind != AgentKind::PureRl {
        return Err(Error::Config("pure-RL head called with a CIRL policy".into()));
    }
    let raw = p.forward(&build_observation_vector(obs, ranges))?;
    Ok(Action::new(squash(raw[0], &ranges.t_c), squash(raw[1], &ranges.f_in)).clamp())
}

/// What a controller decided at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub action: Action,
    /// Present for controllers with a PID layer.
    pub gains: Option<PidGainSet>,
}

/// Anything that can drive the reactor for an episode.
pub trait Controller: Sync {
    fn act(&self, obs: &Observation, prev_u: Action, dt: f64, ranges: &Ranges) -> Result<Decision>;
}

impl Controller for PolicyParams {
    fn act(&self, obs: &Observation, prev_u: Action, dt: f64, ranges: &Ranges) -> Result<Decision> {
        match self.kind {
            AgentKind::Cirl => {
                let (gains, action) = cirl_act(self, obs, prev_u, dt, ranges, &GainBounds::default())?;
                Ok(Decision {
                    action,
                    gains: Some(gains),
                })
            }
            AgentKind::PureRl => Ok(Decision {
                action: purerl_act(self, obs, ranges)?,
                gains: None,
            }),
        }
    }
}

/// Fixed-gain two-loop PID.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticPid {
    pub gains: PidGainSet,
}

impl Controller for StaticPid {
    fn act(&self, obs: &Observation, prev_u: Action, dt: f64, ranges: &Ranges) -> Result<Decision> {
        let errors = error_histories(obs, ranges);
        let action = pid_apply(prev_u, pid_deltas(&self.gains, &errors, dt), ranges);
        Ok(Decision {
            action,
            gains: Some(self.gains),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::Setpoint;
    use crate::sim::{Measurement, CONTROL_DT};
    use proptest::prelude::*;

    fn obs(cb: f64, t: f64, v: f64, sp: f64) -> Observation {
        Observation::filled(
            Measurement {
                c_b: cb,
                temp: t,
                vol: v,
            },
            Setpoint { c_b: sp, vol: 100.0 },
        )
    }

    #[test]
    fn observation_vector_scaling() {
        let r = Ranges::default();
        assert_eq!(build_observation_vector(&obs(0.0, 300.0, 95.0, 0.0), &r), [0.0; 12]);
        assert_eq!(build_observation_vector(&obs(1.0, 450.0, 110.0, 1.0), &r), [1.0; 12]);
        assert_eq!(build_observation_vector(&obs(0.5, 375.0, 102.5, 0.5), &r), [0.5; 12]);
    }

    #[test]
    fn observation_vector_order() {
        let r = Ranges::default();
        let mut o = obs(0.5, 375.0, 102.5, 0.5);
        o.measured[2].c_b = 0.0;
        o.setpoints[1].c_b = 1.0;
        let x = build_observation_vector(&o, &r);
        assert_eq!(x[6], 0.0);
        assert_eq!(x[10], 1.0);
    }

    #[test]
    fn zero_cirl_policy_sits_at_midpoint_gains() {
        let p = PolicyParams::zeros(AgentKind::Cirl);
        let r = Ranges::default();
        let b = GainBounds::default();
        let o = obs(0.3, 350.0, 100.0, 0.3);
        let u = Action::new(330.0, 100.0);
        let (g, act) = cirl_act(&p, &o, u, CONTROL_DT, &r, &b).unwrap();
        assert_eq!(g, b.midpoint());
        assert_eq!(act, u);
    }

    #[test]
    fn low_raw_output_pins_lower_bound() {
        let mut p = PolicyParams::zeros(AgentKind::Cirl);
        let n = p.params.len();
        // Output biases are the last six parameters.
        for b in &mut p.params[n - 6..] {
            *b = -50.0;
        }
        let b = GainBounds::default();
        let g = cirl_gains(&p, &obs(0.3, 350.0, 100.0, 0.3), &Ranges::default(), &b).unwrap();
        assert_eq!(g.to_array(), b.spans().map(|s| s.lo));
    }

    #[test]
    fn zero_pure_rl_policy_gives_mid_action() {
        let p = PolicyParams::zeros(AgentKind::PureRl);
        let a = purerl_act(&p, &obs(0.3, 350.0, 100.0, 0.3), &Ranges::default()).unwrap();
        assert_eq!(a, Action::new(370.0, 102.0));
    }

    #[test]
    fn saturating_pure_rl_output_pins_bounds() {
        let mut p = PolicyParams::zeros(AgentKind::PureRl);
        let n = p.params.len();
        p.params[n - 2] = 1e6;
        p.params[n - 1] = -1e6;
        let a = purerl_act(&p, &obs(0.3, 350.0, 100.0, 0.3), &Ranges::default()).unwrap();
        assert_eq!(a, Action::new(450.0, 99.0));
    }

    #[test]
    fn heads_reject_wrong_kind_and_shape() {
        let r = Ranges::default();
        let o = obs(0.3, 350.0, 100.0, 0.3);
        assert!(purerl_act(&PolicyParams::zeros(AgentKind::Cirl), &o, &r).is_err());
        assert!(cirl_gains(&PolicyParams::zeros(AgentKind::PureRl), &o, &r, &GainBounds::default()).is_err());
        assert!(PolicyParams::new(AgentKind::Cirl, MlpLayout::cirl(), vec![0.0; 853]).is_err());
        assert!(PolicyParams::new(AgentKind::Cirl, MlpLayout::pure_rl(), vec![0.0; 34_946]).is_err());
    }

    #[test]
    fn static_pid_holds_without_error() {
        let pid = StaticPid {
            gains: PidGainSet::REFERENCE,
        };
        let u = Action::new(320.0, 101.0);
        let d = pid
            .act(&obs(0.4, 340.0, 100.0, 0.4), u, CONTROL_DT, &Ranges::default())
            .unwrap();
        assert_eq!(d.action, u);
        assert_eq!(d.gains, Some(PidGainSet::REFERENCE));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn outputs_stay_in_bounds(seed in any::<u64>(), scale in 0.1f64..100.0,
                                  cb in -0.5f64..1.5, t in 250.0f64..500.0, v in 80.0f64..120.0,
                                  sp in 0.0f64..1.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let r = Ranges::default();
            let b = GainBounds::default();
            let o = obs(cb, t, v, sp);
            let cirl = PolicyParams {
                params: (0..854).map(|_| scale * rng.random_range(-1.0..1.0)).collect(),
                ..PolicyParams::zeros(AgentKind::Cirl)
            };
            let (g, u) = cirl_act(&cirl, &o, Action::midpoint(), CONTROL_DT, &r, &b).unwrap();
            prop_assert!(b.contains(&g));
            prop_assert!(u.within_bounds());
            let rl = PolicyParams {
                params: (0..34_946).map(|_| scale * rng.random_range(-1.0..1.0)).collect(),
                ..PolicyParams::zeros(AgentKind::PureRl)
            };
            let a = purerl_act(&rl, &o, &r).unwrap();
            prop_assert!(a.within_bounds());
            prop_assert_eq!(a, purerl_act(&rl, &o, &r).unwrap());
        }
    }
}
