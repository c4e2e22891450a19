//! CSTR with the series reaction A -> B -> C, manipulated through coolant
//! temperature and inlet flow. Time is in minutes throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complete reactor state advanced by the integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullState {
    /// Concentration of A (mol/m³).
    pub c_a: f64,
    /// Concentration of B (mol/m³).
    pub c_b: f64,
    /// Concentration of C (mol/m³).
    pub c_c: f64,
    /// Reactor temperature (K).
    pub temp: f64,
    /// Reactor volume (m³).
    pub vol: f64,
}

impl FullState {
    pub const fn new(c_a: f64, c_b: f64, c_c: f64, temp: f64, vol: f64) -> Self {
        Self {
            c_a,
            c_b,
            c_c,
            temp,
            vol,
        }
    }

    /// Start of every episode: empty of all species, 327 K, 102 m³.
    pub const fn initial() -> Self {
        Self::new(0.0, 0.0, 0.0, 327.0, 102.0)
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.c_a, self.c_b, self.c_c, self.temp, self.vol]
    }

    pub fn from_array(x: [f64; 5]) -> Self {
        Self::new(x[0], x[1], x[2], x[3], x[4])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Physical constants of the reactor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CstrParams {
    /// Feed temperature (K).
    pub t_f: f64,
    /// Nominal feed concentration of A (mol/m³).
    pub c_a_in: f64,
    /// Outlet flow (m³/min).
    pub f_out: f64,
    /// Density (kg/m³).
    pub rho: f64,
    /// Heat capacity (J/kg·K).
    pub c_p: f64,
    /// Heat transfer coefficient times area.
    pub ua: f64,
    /// Heat released by A -> B (J/mol).
    pub dh_a: f64,
    /// Heat released by B -> C (J/mol).
    pub dh_b: f64,
    /// Activation temperature of A -> B (K).
    pub e_a_over_r: f64,
    /// Activation temperature of B -> C (K).
    pub e_b_over_r: f64,
    /// Pre-exponential constant of A -> B (1/min).
    pub k_a: f64,
    /// Pre-exponential constant of B -> C (1/min).
    pub k_b: f64,
}

impl Default for CstrParams {
    fn default() -> Self {
        Self {
            t_f: 350.0,
            c_a_in: 1.0,
            f_out: 100.0,
            rho: 1000.0,
            c_p: 0.239,
            ua: 5.0e4,
            dh_a: 5.0e3,
            dh_b: 4.0e3,
            e_a_over_r: 8750.0,
            e_b_over_r: 10750.0,
            k_a: 7.2e10,
            k_b: 8.2e10,
        }
    }
}

impl CstrParams {
    /// Checks that every constant is finite and strictly positive.
    ///
    /// Rate constants may be zero, which switches the chemistry off.
    pub fn validate(&self) -> Result<()> {
        let strictly_positive = [
            ("t_f", self.t_f),
            ("c_a_in", self.c_a_in),
            ("f_out", self.f_out),
            ("rho", self.rho),
            ("c_p", self.c_p),
            ("ua", self.ua),
            ("dh_a", self.dh_a),
            ("dh_b", self.dh_b),
            ("e_a_over_r", self.e_a_over_r),
            ("e_b_over_r", self.e_b_over_r),
        ];
        for (name, v) in strictly_positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("parameter {name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("k_a", self.k_a), ("k_b", self.k_b)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain(format!("parameter {name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

/// Manipulated variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    /// Coolant temperature (K).
    pub t_c: f64,
    /// Inlet flow (m³/min).
    pub f_in: f64,
}

impl Action {
    pub const LOWER: Action = Action { t_c: 290.0, f_in: 99.0 };
    pub const UPPER: Action = Action {
        t_c: 450.0,
        f_in: 105.0,
    };

    pub const fn new(t_c: f64, f_in: f64) -> Self {
        Self { t_c, f_in }
    }

    pub fn midpoint() -> Self {
        Self::new(
            0.5 * (Self::LOWER.t_c + Self::UPPER.t_c),
            0.5 * (Self::LOWER.f_in + Self::UPPER.f_in),
        )
    }

    /// Saturates both channels to the actuator limits. NaN maps to the lower bound.
    pub fn clamp(self) -> Self {
        Self::new(
            saturate(self.t_c, Self::LOWER.t_c, Self::UPPER.t_c),
            saturate(self.f_in, Self::LOWER.f_in, Self::UPPER.f_in),
        )
    }

    pub fn within_bounds(&self) -> bool {
        (Self::LOWER.t_c..=Self::UPPER.t_c).contains(&self.t_c)
            && (Self::LOWER.f_in..=Self::UPPER.f_in).contains(&self.f_in)
    }
}

pub(crate) fn saturate(v: f64, lo: f64, hi: f64) -> f64 {
    if v.is_nan() {
        lo
    } else {
        v.clamp(lo, hi)
    }
}

#[inline]
fn rates_unchecked(c_a: f64, c_b: f64, temp: f64, p: &CstrParams) -> (f64, f64) {
    let r_a = p.k_a * (-p.e_a_over_r / temp).exp() * c_a;
    let r_b = p.k_b * (-p.e_b_over_r / temp).exp() * c_b;
    (r_a, r_b)
}

/// Arrhenius rates (mol/m³/min) of A -> B and B -> C.
pub fn reaction_rates(state: &FullState, p: &CstrParams) -> Result<(f64, f64)> {
    if !state.is_finite() {
        return Err(Error::Domain(format!("non-finite state {state:?}")));
    }
    if state.temp <= 0.0 {
        return Err(Error::Domain(format!(
            "temperature must be positive, got {}",
            state.temp
        )));
    }
    Ok(rates_unchecked(state.c_a, state.c_b, state.temp, p))
}

/// Right-hand side in array form, ordered as [`FullState::to_array`]. No checks.
#[inline]
pub(crate) fn rhs_array(x: &[f64; 5], u: &Action, p: &CstrParams, c_a_in: f64) -> [f64; 5] {
    let [c_a, c_b, c_c, temp, vol] = *x;
    let (r_a, r_b) = rates_unchecked(c_a, c_b, temp, p);
    let rho_cp = p.rho * p.c_p;
    let dilution = p.f_out / vol;
    [
        (u.f_in * c_a_in - p.f_out * c_a) / vol - r_a,
        r_a - r_b - dilution * c_b,
        r_b - dilution * c_c,
        u.f_in * (p.t_f - temp) / vol
            + p.dh_a / rho_cp * r_a
            + p.dh_b / rho_cp * r_b
            + p.ua * (u.t_c - temp) / (vol * rho_cp),
        u.f_in - p.f_out,
    ]
}

/// Time derivative of the reactor state under action `u` and effective feed
/// concentration `c_a_in_eff` (which carries any feed disturbance).
pub fn cstr_rhs(state: &FullState, u: &Action, p: &CstrParams, c_a_in_eff: f64) -> Result<[f64; 5]> {
    if !(state.vol > 0.0) {
        return Err(Error::SingularVolume(state.vol));
    }
    if !state.is_finite() || !c_a_in_eff.is_finite() || !u.t_c.is_finite() || !u.f_in.is_finite() {
        return Err(Error::Domain("non-finite input to reactor model".into()));
    }
    if state.temp <= 0.0 {
        return Err(Error::Domain(format!(
            "temperature must be positive, got {}",
            state.temp
        )));
    }
    Ok(rhs_array(&state.to_array(), u, p, c_a_in_eff))
}
