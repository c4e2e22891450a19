//! Setpoint schedules and feed disturbances for the training and test episodes.
//!
//! Every schedule is a list of piecewise-constant, half-open segments covering
//! `[0, n_s)`; the disturbance profile is a list of `(start_step, C_A,in)`
//! breakpoints that must begin at step 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{NoiseConfig, RewardWeights};

/// Steps per episode.
pub const EPISODE_STEPS: usize = 120;
/// Volume setpoint shared by every built-in scenario (m³).
pub const VOLUME_SETPOINT: f64 = 100.0;
/// Nominal feed concentration of A (mol/m³).
pub const NOMINAL_FEED: f64 = 1.0;
/// Step at which built-in disturbances switch on.
pub const DISTURBANCE_ONSET: usize = 60;
/// C_B setpoint held during the disturbance episodes (mol/m³).
pub const DISTURBANCE_CB_SETPOINT: f64 = 0.45;

/// Setpoint pair for the controlled variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setpoint {
    pub c_b: f64,
    pub vol: f64,
}

/// One plateau of a setpoint schedule, serialized as `[steps, cb_sp, v_sp]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(usize, f64, f64)", into = "(usize, f64, f64)")]
pub struct Segment {
    pub steps: usize,
    pub c_b: f64,
    pub vol: f64,
}

impl From<(usize, f64, f64)> for Segment {
    fn from((steps, c_b, vol): (usize, f64, f64)) -> Self {
        Self { steps, c_b, vol }
    }
}

impl From<Segment> for (usize, f64, f64) {
    fn from(s: Segment) -> Self {
        (s.steps, s.c_b, s.vol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SetpointSchedule {
    pub segments: Vec<Segment>,
}

impl SetpointSchedule {
    /// Splits `n_steps` into equal plateaus at the given C_B setpoints; any
    /// remainder goes to the last plateau.
    pub fn equal_plateaus(c_b: &[f64], vol: f64, n_steps: usize) -> Self {
        let n = c_b.len();
        let base = n_steps / n;
        let segments = c_b
            .iter()
            .enumerate()
            .map(|(i, &c)| Segment {
                steps: if i + 1 == n { n_steps - base * (n - 1) } else { base },
                c_b: c,
                vol,
            })
            .collect();
        Self { segments }
    }

    pub fn total_steps(&self) -> usize {
        self.segments.iter().map(|s| s.steps).sum()
    }

    /// Setpoint active at `step`.
    pub fn setpoint_at(&self, step: usize) -> Result<Setpoint> {
        let mut end = 0;
        for seg in &self.segments {
            end += seg.steps;
            if step < end {
                return Ok(Setpoint {
                    c_b: seg.c_b,
                    vol: seg.vol,
                });
            }
        }
        Err(Error::OutOfRange { step, n_steps: end })
    }

    pub fn c_b_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().map(|s| s.c_b)
    }
}

/// Piecewise-constant feed concentration, serialized as `[start_step, c_a_in]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(usize, f64)", into = "(usize, f64)")]
pub struct FeedStep {
    pub start_step: usize,
    pub c_a_in: f64,
}

impl From<(usize, f64)> for FeedStep {
    fn from((start_step, c_a_in): (usize, f64)) -> Self {
        Self { start_step, c_a_in }
    }
}

impl From<FeedStep> for (usize, f64) {
    fn from(s: FeedStep) -> Self {
        (s.start_step, s.c_a_in)
    }
}

/// Everything that defines one episode apart from the policy and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub id: String,
    pub schedule: SetpointSchedule,
    #[serde(default = "nominal_feed")]
    pub disturbance: Vec<FeedStep>,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub weights: RewardWeights,
    pub n_s: usize,
}

fn nominal_feed() -> Vec<FeedStep> {
    vec![FeedStep {
        start_step: 0,
        c_a_in: NOMINAL_FEED,
    }]
}

impl Scenario {
    /// Scenario with nominal feed, default noise and default reward weights.
    pub fn tracking(id: impl Into<String>, schedule: SetpointSchedule) -> Self {
        let n_s = schedule.total_steps();
        Self {
            id: id.into(),
            schedule,
            disturbance: nominal_feed(),
            noise: NoiseConfig::default(),
            weights: RewardWeights::default(),
            n_s,
        }
    }

    pub fn with_noise(mut self, noise: NoiseConfig) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_weights(mut self, weights: RewardWeights) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_feed_step(mut self, start_step: usize, c_a_in: f64) -> Self {
        self.disturbance.push(FeedStep { start_step, c_a_in });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_s == 0 {
            return Err(Error::Config(format!("scenario '{}': n_s must be at least 1", self.id)));
        }
        if self.schedule.total_steps() != self.n_s {
            return Err(Error::Config(format!(
                "scenario '{}': schedule covers {} steps but n_s = {}",
                self.id,
                self.schedule.total_steps(),
                self.n_s
            )));
        }
        if self
            .schedule
            .segments
            .iter()
            .any(|s| !(s.c_b.is_finite() && s.vol.is_finite()))
        {
            return Err(Error::Config(format!("scenario '{}': non-finite setpoint", self.id)));
        }
        match self.disturbance.first() {
            Some(first) if first.start_step == 0 => {}
            _ => {
                return Err(Error::Config(format!(
                    "scenario '{}': disturbance profile must start at step 0",
                    self.id
                )))
            }
        }
        if self.disturbance.windows(2).any(|w| w[1].start_step <= w[0].start_step) {
            return Err(Error::Config(format!(
                "scenario '{}': disturbance breakpoints must be strictly increasing",
                self.id
            )));
        }
        if self
            .disturbance
            .iter()
            .any(|d| !(d.c_a_in > 0.0 && d.c_a_in.is_finite()))
        {
            return Err(Error::Config(format!(
                "scenario '{}': feed concentration must be positive",
                self.id
            )));
        }
        if self.noise.std.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::Config(format!(
                "scenario '{}': noise std must be non-negative",
                self.id
            )));
        }
        let w = &self.weights;
        if w.q.iter().chain(w.r.iter()).any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::Config(format!(
                "scenario '{}': reward weights must be non-negative",
                self.id
            )));
        }
        Ok(())
    }

    pub fn setpoint_at(&self, step: usize) -> Result<Setpoint> {
        if step >= self.n_s {
            return Err(Error::OutOfRange {
                step,
                n_steps: self.n_s,
            });
        }
        self.schedule.setpoint_at(step)
    }

    /// Feed concentration applied during control interval `step`.
    pub fn feed_at(&self, step: usize) -> f64 {
        self.disturbance
            .iter()
            .take_while(|d| d.start_step <= step)
            .last()
            .map_or(NOMINAL_FEED, |d| d.c_a_in)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }
}

/// A named group of sub-episodes whose rewards are summed into one fitness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    pub id: String,
    pub scenarios: Vec<Scenario>,
}

impl ScenarioSet {
    pub fn new(id: impl Into<String>, scenarios: Vec<Scenario>) -> Self {
        Self {
            id: id.into(),
            scenarios,
        }
    }

    pub fn single(s: Scenario) -> Self {
        Self {
            id: s.id.clone(),
            scenarios: vec![s],
        }
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::Config(format!("scenario set '{}' is empty", self.id)));
        }
        self.scenarios.iter().try_for_each(Scenario::validate)
    }

    pub fn map(mut self, f: impl Fn(Scenario) -> Scenario) -> Self {
        self.scenarios = self.scenarios.into_iter().map(f).collect();
        self
    }
}

fn plateaus(id: &str, c_b: &[f64]) -> Scenario {
    Scenario::tracking(
        id,
        SetpointSchedule::equal_plateaus(c_b, VOLUME_SETPOINT, EPISODE_STEPS),
    )
}

/// The three setpoint-tracking training sub-episodes.
pub fn training_set() -> ScenarioSet {
    ScenarioSet::new(
        "training",
        vec![
            plateaus("training-1", &[0.1, 0.25, 0.4]),
            plateaus("training-2", &[0.55, 0.65, 0.75]),
            plateaus("training-3", &[0.7, 0.75, 0.8]),
        ],
    )
}

/// Test schedule; its first plateau lies below every training setpoint.
pub fn test_scenario() -> Scenario {
    plateaus("test", &[0.075, 0.45, 0.75])
}

/// Training set plus a sub-episode around the top of the steady-state C_B curve
/// (peak ≈ 0.855 mol/m³ near T_c ≈ 395 K), ending above the reachable maximum.
pub fn extended_training_set() -> ScenarioSet {
    let mut set = training_set();
    set.id = "extended".into();
    set.scenarios.push(plateaus("extended-4", &[0.82, 0.85, 0.88]));
    set
}

/// High-operating-point test: 0.45 then 0.88 mol/m³.
pub fn high_op_test_scenario() -> Scenario {
    plateaus("highop", &[0.45, 0.88])
}

fn disturbed(id: &str, c_a_in: f64) -> Scenario {
    Scenario::tracking(
        id,
        SetpointSchedule::equal_plateaus(&[DISTURBANCE_CB_SETPOINT], VOLUME_SETPOINT, EPISODE_STEPS),
    )
    .with_feed_step(DISTURBANCE_ONSET, c_a_in)
}

/// Feed-concentration step training sub-episodes and the held-out test episode.
pub fn disturbance_set() -> (ScenarioSet, Scenario) {
    let train = ScenarioSet::new(
        "disturbance-training",
        vec![
            disturbed("disturbance-1", 1.5),
            disturbed("disturbance-2", 1.6),
            disturbed("disturbance-3", 1.9),
        ],
    );
    (train, disturbed("disturbance-test", 1.75))
}

/// Resolves a built-in scenario set by id.
pub fn builtin(id: &str) -> Option<ScenarioSet> {
    Some(match id {
        "training" => training_set(),
        "test" => ScenarioSet::single(test_scenario()),
        "extended" => extended_training_set(),
        "highop" => ScenarioSet::single(high_op_test_scenario()),
        "disturbance-training" => disturbance_set().0,
        "disturbance-test" => ScenarioSet::single(disturbance_set().1),
        _ => return None,
    })
}

pub const BUILTIN_IDS: [&str; 6] = [
    "training",
    "test",
    "extended",
    "highop",
    "disturbance-training",
    "disturbance-test",
];

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn distinct(values: impl Iterator<Item = f64>) -> BTreeSet<u64> {
        values.map(f64::to_bits).collect()
    }

    #[test]
    fn training_set_layout() {
        let set = training_set();
        assert_eq!(set.len(), 3);
        assert_eq!(set.scenarios[0].setpoint_at(0).unwrap().c_b, 0.1);
        for s in &set.scenarios {
            assert_eq!(s.n_s, 120);
            assert!(s.schedule.segments.iter().all(|seg| seg.steps == 40));
            s.validate().unwrap();
        }
        let all = set
            .scenarios
            .iter()
            .flat_map(|s| s.schedule.c_b_values().collect::<Vec<_>>());
        // 0.75 closes one profile and sits mid-way through another.
        assert_eq!(distinct(all).len(), 8);
    }

    #[test]
    fn test_scenario_layout() {
        let s = test_scenario();
        let training_min = training_set()
            .scenarios
            .iter()
            .flat_map(|s| s.schedule.c_b_values().collect::<Vec<_>>())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(training_min, 0.1);
        assert!(s.setpoint_at(0).unwrap().c_b < training_min);
        assert_eq!(s.schedule.total_steps(), 120);
        assert_eq!(s.setpoint_at(0).unwrap(), Setpoint { c_b: 0.075, vol: 100.0 });
        assert_eq!(s.setpoint_at(119).unwrap(), Setpoint { c_b: 0.75, vol: 100.0 });
        assert_eq!(s.setpoint_at(39).unwrap().c_b, 0.075);
        assert_eq!(s.setpoint_at(40).unwrap().c_b, 0.45);
        assert!(matches!(s.setpoint_at(120), Err(Error::OutOfRange { .. })));
        for step in 0..120 {
            assert_eq!(s.setpoint_at(step).unwrap().vol, VOLUME_SETPOINT);
        }
    }

    #[test]
    fn extended_set_contains_training_set() {
        let base = training_set();
        let ext = extended_training_set();
        assert!(base.scenarios.iter().all(|s| ext.scenarios.contains(s)));
        let added: Vec<f64> = ext.scenarios[3].schedule.c_b_values().collect();
        assert!(added.iter().all(|&c| c > 0.8));
        assert_eq!(high_op_test_scenario().setpoint_at(119).unwrap().c_b, 0.88);
        assert_eq!(high_op_test_scenario().setpoint_at(0).unwrap().c_b, 0.45);
    }

    #[test]
    fn disturbance_profiles() {
        let (train, test) = disturbance_set();
        let levels: Vec<f64> = train.scenarios.iter().map(|s| s.feed_at(119)).collect();
        assert_eq!(levels, vec![1.5, 1.6, 1.9]);
        assert_eq!(test.feed_at(DISTURBANCE_ONSET - 1), 1.0);
        assert_eq!(test.feed_at(DISTURBANCE_ONSET), 1.75);
        assert!(levels[1] < 1.75 && 1.75 < levels[2]);
        for s in train.scenarios.iter().chain([&test]) {
            s.validate().unwrap();
            assert_eq!(s.feed_at(0), 1.0);
        }
    }

    #[test]
    fn all_builtins_hold_volume_setpoint() {
        for id in BUILTIN_IDS {
            let set = builtin(id).unwrap();
            set.validate().unwrap();
            for s in &set.scenarios {
                for step in 0..s.n_s {
                    assert_eq!(s.setpoint_at(step).unwrap().vol, 100.0);
                }
            }
        }
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn construction_is_deterministic() {
        assert_eq!(training_set(), training_set());
        assert_eq!(disturbance_set(), disturbance_set());
    }

    #[test]
    fn json_round_trip_and_layout() {
        let s = disturbance_set().1;
        let text = s.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["schedule"][0], serde_json::json!([120, 0.45, 100.0]));
        assert_eq!(v["disturbance"][1], serde_json::json!([60, 1.75]));
        assert_eq!(v["n_s"], 120);
        assert_eq!(Scenario::from_json(&text).unwrap(), s);
    }

    #[test]
    fn invalid_files_are_rejected() {
        let mut s = test_scenario();
        s.n_s = 100;
        assert!(s.validate().is_err());
        let mut s = test_scenario();
        s.disturbance = vec![FeedStep {
            start_step: 5,
            c_a_in: 1.0,
        }];
        assert!(s.validate().is_err());
        let mut s = test_scenario();
        s.disturbance.push(FeedStep {
            start_step: 10,
            c_a_in: -1.0,
        });
        assert!(s.validate().is_err());
    }
}
