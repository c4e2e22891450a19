use thiserror::Error;

/// Errors produced by the simulation, control and training layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("reactor volume must be positive, got {0}")]
    SingularVolume(f64),

    #[error("integration diverged at substep {substep}: non-finite state {state:?}")]
    Divergence { substep: usize, state: [f64; 5] },

    #[error("episode divergence at step {step} of scenario '{scenario}' (seed {seed}): {source}")]
    Episode {
        scenario: String,
        seed: u64,
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("matrix is singular (determinant {0:e})")]
    Singular(f64),

    #[error("no steady state reached within {horizon_min} min (residual {residual:e})")]
    NonConvergence { horizon_min: f64, residual: f64 },

    #[error("step {step} outside schedule of {n_steps} steps")]
    OutOfRange { step: usize, n_steps: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the error originates from numerical blow-up of the plant model.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Divergence { .. } | Error::SingularVolume(_) | Error::NonConvergence { .. } => true,
            Error::Episode { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
