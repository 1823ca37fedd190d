use std::fmt;

use thiserror::Error;

/// Failure class, mapped to the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Validation => 1,
            ErrorKind::Numerical | ErrorKind::Io => 2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ErrorKind::Validation => "validation",
            ErrorKind::Numerical => "numerical",
            ErrorKind::Io => "io",
        }
    }
}

#[derive(Debug, Clone, Error)]
#[error("{}: {message}", kind.name())]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Validation,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl fmt::Display) -> Self {
        Self {
            kind: ErrorKind::Numerical,
            message: message.to_string(),
        }
    }

    pub fn io(message: impl fmt::Display) -> Self {
        Self {
            kind: ErrorKind::Io,
            message: message.to_string(),
        }
    }

    /// Single-line `error kind=<kind> message=<json string>` form.
    pub fn line(&self) -> String {
        format!(
            "error kind={} message={}",
            self.kind.name(),
            serde_json::to_string(&self.message).unwrap_or_default()
        )
    }
}
