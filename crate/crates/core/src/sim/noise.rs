use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::model::FullState;
use super::ranges::Ranges;

/// Standard deviations of additive Gaussian measurement noise on [C_B, T, V].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub std: [f64; 3],
}

impl NoiseConfig {
    pub const fn none() -> Self {
        Self { std: [0.0; 3] }
    }

    /// `fraction` of each channel's scaling range.
    pub fn relative(fraction: f64, ranges: &Ranges) -> Self {
        Self {
            std: [
                fraction * ranges.c_b.width(),
                fraction * ranges.temp.width(),
                fraction * ranges.vol.width(),
            ],
        }
    }

    pub fn is_silent(&self) -> bool {
        self.std.iter().all(|s| *s == 0.0)
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self::relative(0.01, &Ranges::default())
    }
}

/// Noisy reading of the observed channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub c_b: f64,
    pub temp: f64,
    pub vol: f64,
}

/// Adds one standard-normal draw per channel, always in the order C_B, T, V,
/// so the random stream does not depend on the configured magnitudes.
pub fn observe<R: Rng + ?Sized>(state: &FullState, noise: &NoiseConfig, rng: &mut R) -> Measurement {
    let z: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
    Measurement {
        c_b: state.c_b + noise.std[0] * z[0],
        temp: state.temp + noise.std[1] * z[1],
        vol: state.vol + noise.std[2] * z[2],
    }
}
