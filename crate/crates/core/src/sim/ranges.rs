use serde::{Deserialize, Serialize};

use super::model::Action;

/// Closed interval used for min-max scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
}

impl Span {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn normalize(&self, v: f64) -> f64 {
        (v - self.lo) / self.width()
    }

    #[inline]
    pub fn denormalize(&self, v: f64) -> f64 {
        self.lo + v * self.width()
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Scaling ranges for measured variables and actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ranges {
    pub c_b: Span,
    pub temp: Span,
    pub vol: Span,
    pub t_c: Span,
    pub f_in: Span,
}

impl Default for Ranges {
    fn default() -> Self {
        Self {
            c_b: Span::new(0.0, 1.0),
            temp: Span::new(300.0, 450.0),
            vol: Span::new(95.0, 110.0),
            t_c: Span::new(Action::LOWER.t_c, Action::UPPER.t_c),
            f_in: Span::new(Action::LOWER.f_in, Action::UPPER.f_in),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn normalize_round_trip(v in -1e3f64..1e3) {
            let r = Ranges::default();
            for s in [r.c_b, r.temp, r.vol, r.t_c, r.f_in] {
                let back = s.denormalize(s.normalize(v));
                prop_assert!((back - v).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }
    }
}
