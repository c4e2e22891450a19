//! Steady-state gain identification and relative gain array for loop pairing.
//!
//! Gain matrices here have rows ordered (C_B, V) and columns ordered
//! (F_in, T_c).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{
    cstr_rhs, integrate_step, observe, Action, CstrParams, FullState, NoiseConfig, CONTROL_DT, DEFAULT_SUBSTEPS,
};

pub type Matrix2 = [[f64; 2]; 2];

pub const OUTPUT_NAMES: [&str; 2] = ["C_B", "V"];
pub const INPUT_NAMES: [&str; 2] = ["F_in", "T_c"];

/// Relative gain array `K ∘ (K⁻¹)ᵀ`.
pub fn rga(k: &Matrix2) -> Result<Matrix2> {
    let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
    let scale = k.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !det.is_finite() || scale == 0.0 || det.abs() <= 1e-14 * scale * scale {
        return Err(Error::Singular(det));
    }
    let inv = [[k[1][1] / det, -k[0][1] / det], [-k[1][0] / det, k[0][0] / det]];
    // `+ 0.0` turns the -0.0 of an exactly zero gain into 0.0.
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| k[i][j] * inv[j][i] + 0.0)
    }))
}

/// Loop pairing implied by an RGA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pairing {
    /// C_B ↔ F_in, V ↔ T_c.
    Diagonal,
    /// C_B ↔ T_c, V ↔ F_in.
    OffDiagonal,
}

impl Pairing {
    pub fn from_rga(lambda: &Matrix2) -> Self {
        if lambda[0][0] >= 0.5 {
            Pairing::Diagonal
        } else {
            Pairing::OffDiagonal
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            Pairing::Diagonal => "C_B<->F_in, V<->T_c",
            Pairing::OffDiagonal => "C_B<->T_c, V<->F_in",
        }
    }
}

/// Settings for a step-test gain identification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainProbe {
    pub base: Action,
    /// Step sizes on (T_c, F_in).
    pub steps: Action,
    pub repeats: usize,
    pub noise: NoiseConfig,
    pub seed: u64,
    /// Longest time allowed to settle at the base point (min).
    pub settle_horizon_min: f64,
    /// Largest |dx/dt| on C_A, C_B, C_C and T accepted as steady.
    pub tolerance: f64,
    /// Time each step response runs before it is read (min).
    pub response_horizon_min: f64,
}

impl Default for GainProbe {
    fn default() -> Self {
        Self {
            base: Action::new(345.0, 100.0),
            steps: Action::new(5.0, 0.5),
            repeats: 3,
            noise: NoiseConfig::none(),
            seed: 0,
            settle_horizon_min: 500.0,
            tolerance: 1e-9,
            response_horizon_min: 25.0,
        }
    }
}

fn run_for(state: FullState, u: &Action, minutes: f64, p: &CstrParams) -> Result<FullState> {
    let n = (minutes / CONTROL_DT).round().max(1.0) as usize;
    let mut s = state;
    for _ in 0..n {
        s = integrate_step(&s, u, CONTROL_DT, DEFAULT_SUBSTEPS, p, p.c_a_in)?;
    }
    Ok(s)
}

/// Integrates at `u` until the self-regulating states stop moving. Volume is
/// excluded: with unbalanced flows it integrates forever.
pub fn settle(start: FullState, u: &Action, p: &CstrParams, horizon_min: f64, tol: f64) -> Result<FullState> {
    let mut s = start;
    let mut t = 0.0;
    let mut residual = f64::INFINITY;
    while t < horizon_min {
        s = integrate_step(&s, u, CONTROL_DT, DEFAULT_SUBSTEPS, p, p.c_a_in)?;
        t += CONTROL_DT;
        let d = cstr_rhs(&s, u, p, p.c_a_in)?;
        residual = d[..4].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if residual < tol {
            return Ok(s);
        }
    }
    Err(Error::NonConvergence { horizon_min, residual })
}

/// Step-test identification of the 2×2 gain matrix at `probe.base`, averaged
/// over `probe.repeats` noisy repetitions.
pub fn steady_state_gain_matrix(p: &CstrParams, probe: &GainProbe) -> Result<Matrix2> {
    p.validate()?;
    let b = probe.base;
    let strictly_inside = b.t_c > Action::LOWER.t_c
        && b.t_c < Action::UPPER.t_c
        && b.f_in > Action::LOWER.f_in
        && b.f_in < Action::UPPER.f_in;
    if !strictly_inside {
        return Err(Error::Domain(format!(
            "base action {b:?} must lie strictly inside the bounds"
        )));
    }
    let perturbed = [
        Action::new(b.t_c, b.f_in + probe.steps.f_in),
        Action::new(b.t_c + probe.steps.t_c, b.f_in),
    ];
    if perturbed.iter().any(|u| !u.within_bounds()) || probe.steps.t_c == 0.0 || probe.steps.f_in == 0.0 {
        return Err(Error::Domain(format!(
            "step sizes {:?} leave the bounds or are zero",
            probe.steps
        )));
    }
    if probe.repeats == 0 {
        return Err(Error::Domain("at least one repetition is required".into()));
    }

    let steady = settle(FullState::initial(), &b, p, probe.settle_horizon_min, probe.tolerance)?;
    let base_end = run_for(steady, &b, probe.response_horizon_min, p)?;
    let ends = [
        run_for(steady, &perturbed[0], probe.response_horizon_min, p)?,
        run_for(steady, &perturbed[1], probe.response_horizon_min, p)?,
    ];
    let step_sizes = [probe.steps.f_in, probe.steps.t_c];

    let mut k = [[0.0; 2]; 2];
    for r in 0..probe.repeats {
        let mut rng = ChaCha8Rng::seed_from_u64(probe.seed.wrapping_add(r as u64));
        for j in 0..2 {
            let y0 = observe(&base_end, &probe.noise, &mut rng);
            let y1 = observe(&ends[j], &probe.noise, &mut rng);
            k[0][j] += (y1.c_b - y0.c_b) / step_sizes[j];
            k[1][j] += (y1.vol - y0.vol) / step_sizes[j];
        }
    }
    let n = probe.repeats as f64;
    Ok(k.map(|row| row.map(|v| v / n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &Matrix2, b: &Matrix2, tol: f64) {
        for i in 0..2 {
            for j in 0..2 {
                assert!((a[i][j] - b[i][j]).abs() <= tol, "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn identity_rga() {
        assert_close(&rga(&[[1.0, 0.0], [0.0, 1.0]]).unwrap(), &[[1.0, 0.0], [0.0, 1.0]], 0.0);
    }

    #[test]
    fn hand_inverted_rga() {
        // K⁻¹ = [[-2, 1], [1.5, -0.5]] so (K⁻¹)ᵀ = [[-2, 1.5], [1, -0.5]].
        let lambda = rga(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_close(&lambda, &[[-2.0, 3.0], [3.0, -2.0]], 1e-12);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        assert!(matches!(rga(&[[1.0, 2.0], [2.0, 4.0]]), Err(Error::Singular(_))));
        assert!(matches!(rga(&[[0.0, 0.0], [0.0, 0.0]]), Err(Error::Singular(_))));
    }

    #[test]
    fn pairing_labels() {
        assert_eq!(
            Pairing::from_rga(&[[0.0003, 0.9997], [0.9997, 0.0003]]),
            Pairing::OffDiagonal
        );
        assert_eq!(Pairing::from_rga(&[[1.0, 0.0], [0.0, 1.0]]), Pairing::Diagonal);
    }

    #[test]
    fn no_chemistry_means_no_c_b_response() {
        let p = CstrParams {
            k_a: 0.0,
            k_b: 0.0,
            ..CstrParams::default()
        };
        let k = steady_state_gain_matrix(&p, &GainProbe::default()).unwrap();
        assert_eq!(k[0], [0.0, 0.0]);
    }

    #[test]
    fn volume_ignores_coolant() {
        let k = steady_state_gain_matrix(&CstrParams::default(), &GainProbe::default()).unwrap();
        assert!(k[1][1].abs() < 1e-9);
        // Integrating volume: ΔV = ΔF_in · horizon.
        assert!((k[1][0] - 25.0).abs() < 0.05, "{k:?}");
    }

    #[test]
    fn zero_noise_repeats_agree() {
        let p = CstrParams::default();
        let one = steady_state_gain_matrix(
            &p,
            &GainProbe {
                repeats: 1,
                ..GainProbe::default()
            },
        )
        .unwrap();
        let three = steady_state_gain_matrix(&p, &GainProbe::default()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((one[i][j] - three[i][j]).abs() <= 0.02 * one[i][j].abs().max(1e-12));
            }
        }
    }

    #[test]
    fn rejects_points_on_the_boundary() {
        let p = CstrParams::default();
        let probe = GainProbe {
            base: Action::new(290.0, 100.0),
            ..GainProbe::default()
        };
        assert!(steady_state_gain_matrix(&p, &probe).is_err());
        let probe = GainProbe {
            steps: Action::new(200.0, 0.5),
            ..GainProbe::default()
        };
        assert!(steady_state_gain_matrix(&p, &probe).is_err());
    }

    #[test]
    fn short_settling_horizon_fails() {
        let p = CstrParams::default();
        let probe = GainProbe {
            settle_horizon_min: 1.0,
            ..GainProbe::default()
        };
        assert!(matches!(
            steady_state_gain_matrix(&p, &probe),
            Err(Error::NonConvergence { .. })
        ));
    }
}
