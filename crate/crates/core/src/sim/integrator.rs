//! Fixed-step classical Runge-Kutta integration of the reactor model.

use crate::error::{Error, Result};

use super::model::{rhs_array, Action, CstrParams, FullState};

/// Control interval: 25 minutes split into 120 steps.
pub const CONTROL_DT: f64 = 25.0 / 120.0;
/// RK4 substeps per control interval.
pub const DEFAULT_SUBSTEPS: usize = 10;

/// Advances `state` by `dt` minutes with `u` held constant, using `substeps`
/// RK4 steps. Concentrations are clamped at zero afterwards.
pub fn integrate_step(
    state: &FullState,
    u: &Action,
    dt: f64,
    substeps: usize,
    p: &CstrParams,
    c_a_in_eff: f64,
) -> Result<FullState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    if substeps == 0 {
        return Err(Error::Domain("at least one substep is required".into()));
    }
    if !(state.vol > 0.0) {
        return Err(Error::SingularVolume(state.vol));
    }
    if !state.is_finite() {
        return Err(Error::Divergence {
            substep: 0,
            state: state.to_array(),
        });
    }

    let h = dt / substeps as f64;
    let mut x = state.to_array();
    for substep in 0..substeps {
        x = rk4(&x, h, u, p, c_a_in_eff);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                substep: substep + 1,
                state: x,
            });
        }
        if x[4] <= 0.0 {
            return Err(Error::SingularVolume(x[4]));
        }
    }
    for c in &mut x[..3] {
        *c = c.max(0.0);
    }
    Ok(FullState::from_array(x))
}

#[inline]
fn rk4(x: &[f64; 5], h: f64, u: &Action, p: &CstrParams, c_a_in: f64) -> [f64; 5] {
    let k1 = rhs_array(x, u, p, c_a_in);
    let k2 = rhs_array(&axpy(x, 0.5 * h, &k1), u, p, c_a_in);
    let k3 = rhs_array(&axpy(x, 0.5 * h, &k2), u, p, c_a_in);
    let k4 = rhs_array(&axpy(x, h, &k3), u, p, c_a_in);
    let mut out = *x;
    for i in 0..5 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

#[inline]
fn axpy(x: &[f64; 5], a: f64, d: &[f64; 5]) -> [f64; 5] {
    std::array::from_fn(|i| x[i] + a * d[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_is_preserved() {
        let p = CstrParams {
            c_a_in: 1.0,
            ..CstrParams::default()
        };
        let s = FullState::new(0.0, 0.0, 0.0, p.t_f, 100.0);
        let u = Action::new(p.t_f, p.f_out);
        let next = integrate_step(&s, &u, CONTROL_DT, DEFAULT_SUBSTEPS, &p, 0.0).unwrap();
        assert_eq!(next, s);
    }

    #[test]
    fn volume_ramp_is_exact() {
        let p = CstrParams::default();
        let s = FullState::new(0.0, 0.0, 0.0, p.t_f, 100.0);
        let u = Action::new(p.t_f, p.f_out + 1.0);
        let next = integrate_step(&s, &u, 0.5, 3, &p, 0.0).unwrap();
        assert!((next.vol - 100.5).abs() < 1e-12);
    }

    #[test]
    fn step_halving_converges() {
        let p = CstrParams::default();
        let s = FullState::new(0.2, 0.3, 0.05, 360.0, 101.0);
        let u = Action::new(380.0, 103.0);
        let coarse = integrate_step(&s, &u, CONTROL_DT, 10, &p, 1.0).unwrap().to_array();
        let fine = integrate_step(&s, &u, CONTROL_DT, 20, &p, 1.0).unwrap().to_array();
        for (a, b) in coarse.iter().zip(fine) {
            assert!((a - b).abs() <= 1e-6 * b.abs().max(1e-12), "{a} vs {b}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = CstrParams::default();
        let s = FullState::initial();
        let u = Action::midpoint();
        assert!(integrate_step(&s, &u, 0.0, 10, &p, 1.0).is_err());
        assert!(integrate_step(&s, &u, CONTROL_DT, 0, &p, 1.0).is_err());
        let bad = FullState::new(f64::NAN, 0.0, 0.0, 350.0, 100.0);
        assert!(matches!(
            integrate_step(&bad, &u, CONTROL_DT, 10, &p, 1.0),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn blow_up_reports_substep() {
        // Absurd feed pushes the state to infinity within a few substeps.
        let p = CstrParams::default();
        let s = FullState::new(0.0, 0.0, 0.0, 350.0, 100.0);
        let u = Action::new(350.0, 100.0);
        match integrate_step(&s, &u, 1.0, 10, &p, 1e308) {
            Err(Error::Divergence { substep, .. }) => assert!(substep >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn concentrations_are_clamped() {
        // A huge step overshoots C_A below zero; the result is clamped.
        let p = CstrParams::default();
        let s = FullState::new(0.5, 0.0, 0.0, 300.0, 100.0);
        let u = Action::new(300.0, 100.0);
        let next = integrate_step(&s, &u, 3.0, 1, &p, 0.0).unwrap();
        assert!(next.c_a >= 0.0 && next.c_b >= 0.0 && next.c_c >= 0.0);
    }
}
