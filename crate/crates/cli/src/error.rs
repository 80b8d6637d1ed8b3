use std::fmt;

use bimodal_nav::planner::PlanError;
use bimodal_nav::sim::SimError;

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NO_PATH: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_BUDGET: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Invalid,
    NoPath,
    Io,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: FailureKind,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self { kind: FailureKind::Invalid, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { kind: FailureKind::Io, message: message.into() }
    }

    pub fn code(&self) -> i32 {
        match self.kind {
            FailureKind::Invalid => EXIT_INVALID,
            FailureKind::NoPath => EXIT_NO_PATH,
            FailureKind::Io => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        let kind = if e.is_invalid_input() { FailureKind::Invalid } else { FailureKind::NoPath };
        Self { kind, message: e.to_string() }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Plan(p) => p.into(),
            SimError::Io(_) => Self::io(e.to_string()),
            other => Self::invalid(other.to_string()),
        }
    }
}
