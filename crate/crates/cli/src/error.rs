use std::path::Path;
use std::process::ExitCode;

use telescope_core::optimizers::OptimizerError;
use thiserror::Error;

/// Failures that stop a command before it can report a verdict. Failed
/// checks are not errors; commands return exit status 1 for those.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unknown names, unreadable or malformed input.
    #[error("{0}")]
    Input(String),
    /// Oracle, linesearch or subproblem failure, or an output that could
    /// not be written.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn input(msg: impl ToString) -> Self {
        Self::Input(msg.to_string())
    }

    pub fn runtime(msg: impl ToString) -> Self {
        Self::Runtime(msg.to_string())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Input(_) => ExitCode::from(2),
            Self::Runtime(_) => ExitCode::from(3),
        }
    }

    pub fn write(path: &Path, err: impl std::fmt::Display) -> Self {
        Self::Runtime(format!("cannot write {}: {err}", path.display()))
    }
}

impl From<OptimizerError> for CliError {
    fn from(e: OptimizerError) -> Self {
        match e {
            OptimizerError::Params(_) => Self::Input(e.to_string()),
            _ => Self::Runtime(e.to_string()),
        }
    }
}

/// Exit status of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_ok(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn exit_code(self) -> ExitCode {
        match self {
            Self::Pass => ExitCode::SUCCESS,
            Self::Fail => ExitCode::from(1),
        }
    }
}
