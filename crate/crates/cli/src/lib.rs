//! Library backing the `fdf` binary: configuration, dataset synthesis, the
//! end-to-end evaluation pipeline, and report rendering.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod pipeline;
pub mod render;
pub mod synth;

use thiserror::Error;

/// Top-level command failures, mapped to stable process exit codes:
/// 2 input error, 3 evaluation error, 4 report error.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("evaluation error: {0}")]
    Evaluation(String),
    #[error("report error: {0}")]
    Report(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Evaluation(_) => 3,
            CliError::Report(_) => 4,
        }
    }

    /// Machine-readable form emitted on standard error.
    pub fn to_json(&self) -> String {
        let (kind, message) = match self {
            CliError::Input(m) => ("input", m),
            CliError::Evaluation(m) => ("evaluation", m),
            CliError::Report(m) => ("report", m),
        };
        serde_json::json!({
            "error": kind,
            "message": message,
            "exit_code": self.exit_code(),
        })
        .to_string()
    }
}
