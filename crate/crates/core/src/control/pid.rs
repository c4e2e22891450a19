//! Two-loop velocity-form PID on normalized signals.
//!
//! Errors are `x* - x` after min-max scaling, increments are in normalized
//! actuator units, and the gain bounds apply to those dimensionless gains.
//! Pairing is fixed: the C_B loop drives coolant temperature, the volume loop
//! drives inlet flow.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::sim::{saturate, Action, Observation, Ranges, Span};

/// Divisor floor for the integral time (min).
pub const TAU_I_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopGains {
    pub k_p: f64,
    pub tau_i: f64,
    pub tau_d: f64,
}

impl LoopGains {
    pub const fn new(k_p: f64, tau_i: f64, tau_d: f64) -> Self {
        Self { k_p, tau_i, tau_d }
    }
}

/// Gains of both loops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGainSet {
    pub c_b: LoopGains,
    pub vol: LoopGains,
}

impl PidGainSet {
    /// Statically tuned reference gains from the original study.
    pub const REFERENCE: PidGainSet = PidGainSet {
        c_b: LoopGains::new(3.09, 0.03, 0.83),
        vol: LoopGains::new(0.84, 1.85, 0.08),
    };

    /// Ordered `[kp_cb, ti_cb, td_cb, kp_v, ti_v, td_v]`.
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.c_b.k_p,
            self.c_b.tau_i,
            self.c_b.tau_d,
            self.vol.k_p,
            self.vol.tau_i,
            self.vol.tau_d,
        ]
    }

    pub fn from_array(g: [f64; 6]) -> Self {
        Self {
            c_b: LoopGains::new(g[0], g[1], g[2]),
            vol: LoopGains::new(g[3], g[4], g[5]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopBounds {
    pub k_p: Span,
    pub tau_i: Span,
    pub tau_d: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainBounds {
    pub c_b: LoopBounds,
    pub vol: LoopBounds,
}

impl Default for GainBounds {
    fn default() -> Self {
        Self {
            c_b: LoopBounds {
                k_p: Span::new(-5.0, 25.0),
                tau_i: Span::new(0.0, 20.0),
                tau_d: Span::new(0.0, 10.0),
            },
            vol: LoopBounds {
                k_p: Span::new(0.0, 1.0),
                tau_i: Span::new(0.0, 2.0),
                tau_d: Span::new(0.0, 1.0),
            },
        }
    }
}

impl GainBounds {
    /// Spans in [`PidGainSet::to_array`] order.
    pub fn spans(&self) -> [Span; 6] {
        [
            self.c_b.k_p,
            self.c_b.tau_i,
            self.c_b.tau_d,
            self.vol.k_p,
            self.vol.tau_i,
            self.vol.tau_d,
        ]
    }

    pub fn from_spans(s: [Span; 6]) -> Self {
        Self {
            c_b: LoopBounds {
                k_p: s[0],
                tau_i: s[1],
                tau_d: s[2],
            },
            vol: LoopBounds {
                k_p: s[3],
                tau_i: s[4],
                tau_d: s[5],
            },
        }
    }

    pub fn contains(&self, g: &PidGainSet) -> bool {
        self.spans()
            .iter()
            .zip(g.to_array())
            .all(|(s, v)| v >= s.lo && v <= s.hi)
    }

    pub fn clamp(&self, g: &PidGainSet) -> PidGainSet {
        let spans = self.spans();
        let v = g.to_array();
        PidGainSet::from_array(std::array::from_fn(|i| saturate(v[i], spans[i].lo, spans[i].hi)))
    }

    pub fn midpoint(&self) -> PidGainSet {
        let spans = self.spans();
        PidGainSet::from_array(std::array::from_fn(|i| spans[i].midpoint()))
    }
}

/// Errors of one loop at t, t-1 and t-2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorHistory {
    pub e_t: f64,
    pub e_tm1: f64,
    pub e_tm2: f64,
}

impl ErrorHistory {
    pub const fn new(e_t: f64, e_tm1: f64, e_tm2: f64) -> Self {
        Self { e_t, e_tm1, e_tm2 }
    }

    pub const fn constant(e: f64) -> Self {
        Self::new(e, e, e)
    }
}

/// Normalized setpoint errors of the (C_B, V) loops read off an observation.
pub fn error_histories(obs: &Observation, ranges: &Ranges) -> [ErrorHistory; 2] {
    let err = |i: usize| {
        let m = &obs.measured[i];
        let sp = &obs.setpoints[i];
        (
            (sp.c_b - m.c_b) / ranges.c_b.width(),
            (sp.vol - m.vol) / ranges.vol.width(),
        )
    };
    let (cb0, v0) = err(0);
    let (cb1, v1) = err(1);
    let (cb2, v2) = err(2);
    [ErrorHistory::new(cb0, cb1, cb2), ErrorHistory::new(v0, v1, v2)]
}

/// Control increment of one loop:
/// `K_p·Δe + K_p/τ_i·e·dt + K_p·τ_d·Δ²e/dt`.
pub fn pid_velocity_delta(g: &LoopGains, h: &ErrorHistory, dt: f64) -> f64 {
    let de = h.e_t - h.e_tm1;
    let d2e = h.e_t - 2.0 * h.e_tm1 + h.e_tm2;
    g.k_p * de + g.k_p / g.tau_i.max(TAU_I_FLOOR) * h.e_t * dt + g.k_p * g.tau_d * d2e / dt
}

/// Both loop increments, ordered (C_B loop, V loop).
pub fn pid_deltas(g: &PidGainSet, errors: &[ErrorHistory; 2], dt: f64) -> [f64; 2] {
    [
        pid_velocity_delta(&g.c_b, &errors[0], dt),
        pid_velocity_delta(&g.vol, &errors[1], dt),
    ]
}

/// Adds de-normalized increments to the previous action and saturates.
pub fn pid_apply(prev_u: Action, deltas: [f64; 2], ranges: &Ranges) -> Action {
    Action::new(
        prev_u.t_c + deltas[0] * ranges.t_c.width(),
        prev_u.f_in + deltas[1] * ranges.f_in.width(),
    )
    .clamp()
}

pub const GAIN_TRAJECTORY_HEADER: &str = "step,kp_cb,ti_cb,td_cb,kp_v,ti_v,td_v";

/// Writes one row per decision step.
pub fn write_gain_csv<W: Write>(mut w: W, gains: &[PidGainSet]) -> io::Result<()> {
    writeln!(w, "{GAIN_TRAJECTORY_HEADER}")?;
    for (step, g) in gains.iter().enumerate() {
        let [a, b, c, d, e, f] = g.to_array();
        writeln!(w, "{step},{a},{b},{c},{d},{e},{f}")?;
    }
    Ok(())
}
