//! Library half of the `motpipe` binary: command implementations with
//! typed options, kept out of `main.rs` so they are unit-testable.

pub mod commands;
pub mod config;

use std::fmt;

/// Command failures, grouped by exit code: 2 configuration, 3 I/O, 4 data.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Data(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<motpipe_core::mot_io::MotIoError> for CliError {
    fn from(e: motpipe_core::mot_io::MotIoError) -> Self {
        use motpipe_core::mot_io::MotIoError::*;
        match e {
            Read { .. } | Write { .. } => CliError::Io(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}
