//! Feed-forward network over a flat parameter vector.
//!
//! Packing is layer-major; within a layer the `out × in` weight matrix comes
//! first in row-major order, followed by the `out` biases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpLayout {
    pub input: usize,
    pub hidden: Vec<usize>,
    pub output: usize,
}

impl MlpLayout {
    pub fn new(input: usize, hidden: Vec<usize>, output: usize) -> Self {
        Self { input, hidden, output }
    }

    /// 12 → 16 → 16 → 16 → 6.
    pub fn cirl() -> Self {
        Self::new(12, vec![16, 16, 16], 6)
    }

    /// 12 → 128 → 128 → 128 → 2.
    pub fn pure_rl() -> Self {
        Self::new(12, vec![128, 128, 128], 2)
    }

    /// `(fan_in, fan_out)` of every affine layer.
    pub fn layers(&self) -> Vec<(usize, usize)> {
        let widths: Vec<usize> = std::iter::once(self.input)
            .chain(self.hidden.iter().copied())
            .chain([self.output])
            .collect();
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(|(i, o)| i * o + o).sum()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Rectified-linear hidden layers, identity output.
pub fn mlp_forward(layout: &MlpLayout, params: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let expected = layout.param_count();
    if params.len() != expected {
        return Err(Error::Shape {
            expected,
            actual: params.len(),
        });
    }
    if x.len() != layout.input {
        return Err(Error::Shape {
            expected: layout.input,
            actual: x.len(),
        });
    }
    let layers = layout.layers();
    let last = layers.len() - 1;
    let mut act = x.to_vec();
    let mut next = Vec::new();
    let mut offset = 0;
    for (li, &(fan_in, fan_out)) in layers.iter().enumerate() {
        let weights = &params[offset..offset + fan_in * fan_out];
        let biases = &params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
        offset += fan_in * fan_out + fan_out;
        next.clear();
        next.extend(weights.chunks_exact(fan_in).zip(biases).map(|(row, b)| {
            let z = dot(row, &act) + b;
            if li < last {
                z.max(0.0)
            } else {
                z
            }
        }));
        std::mem::swap(&mut act, &mut next);
    }
    Ok(act)
}
