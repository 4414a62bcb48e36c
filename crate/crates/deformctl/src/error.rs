use std::fmt::Display;

use thiserror::Error;

/// Failures that stop a run before any check executes. Both map to exit 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error at {location}: {message}")]
    ConfigInvalid { location: String, message: String },
    #[error("invalid input at {location}: {message}")]
    InputInvalid { location: String, message: String },
}

impl CliError {
    pub fn config(location: impl Display, message: impl Display) -> Self {
        Self::ConfigInvalid {
            location: location.to_string(),
            message: message.to_string(),
        }
    }

    pub fn input(location: impl Display, message: impl Display) -> Self {
        Self::InputInvalid {
            location: location.to_string(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        2
    }
}
