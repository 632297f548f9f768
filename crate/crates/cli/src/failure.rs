//! Error values carrying the process exit code and a JSON error object.

use serde::Serialize;

/// Exit code for invalid input, unreadable files and write failures.
pub const EXIT_CONFIG: u8 = 1;
/// Exit code when the nonlinear solve fails.
pub const EXIT_SOLVER: u8 = 2;
/// Exit code when a check or certification fails.
pub const EXIT_CHECK: u8 = 3;

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    #[serde(skip)]
    pub code: u8,
    #[serde(rename = "error")]
    pub kind: String,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, kind: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code,
            kind: kind.into(),
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(EXIT_CONFIG, "ConfigError", message)
    }

    pub fn config_kind(kind: &str, message: impl Into<String>) -> Self {
        Self::new(EXIT_CONFIG, kind, message)
    }

    pub fn is_broken_pipe(&self) -> bool {
        self.kind == "BrokenPipe"
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error objects serialize")
    }
}

impl From<glvortex::Error> for Failure {
    fn from(e: glvortex::Error) -> Self {
        let code = if e.is_solver_failure() {
            EXIT_SOLVER
        } else {
            EXIT_CONFIG
        };
        Self::new(code, e.kind(), e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            Self::config_kind("BrokenPipe", e.to_string())
        } else {
            Self::config_kind("Io", e.to_string())
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => io.into(),
            other => Self::config_kind("Io", format!("{other:?}")),
        }
    }
}
