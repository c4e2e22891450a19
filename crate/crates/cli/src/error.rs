use std::io;

/// Failures the front end classifies itself.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("missing column '{column}' in {path}")]
    Schema { path: String, column: String },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Exit status for an error chain: usage 2, data 3, numerical divergence 4.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<CliError>() {
            return match e {
                CliError::Usage(_) => EXIT_USAGE,
                CliError::Data(_) | CliError::Schema { .. } => EXIT_DATA,
            };
        }
        if let Some(e) = cause.downcast_ref::<cirl_core::Error>() {
            if e.is_numerical() {
                return EXIT_NUMERICAL;
            }
            return match e {
                cirl_core::Error::Io(_) | cirl_core::Error::Json(_) => EXIT_DATA,
                _ => EXIT_USAGE,
            };
        }
        if cause.is::<io::Error>() || cause.is::<serde_json::Error>() || cause.is::<csv::Error>() {
            return EXIT_DATA;
        }
    }
    1
}
