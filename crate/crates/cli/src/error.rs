use std::path::PathBuf;

use thiserror::Error;

/// Exit codes: 0 holds, 1 refuted or failed stage, 2 estimate, 3 usage/IO.
pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_ESTIMATE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}:{column}: {message}")]
    Json {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{0}")]
    Core(#[from] ultradiff_core::Error),

    #[error("stage `{stage}` failed: {reason}")]
    Stage { stage: String, reason: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Stage { .. } => EXIT_REFUTED,
            _ => EXIT_USAGE,
        }
    }

    pub fn stage(stage: &str, inner: impl std::fmt::Display) -> Self {
        CliError::Stage {
            stage: stage.into(),
            reason: inner.to_string(),
        }
    }
}
