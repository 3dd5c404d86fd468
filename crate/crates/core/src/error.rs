use thiserror::Error;

use crate::solution::CaseTag;

pub type Result<T> = std::result::Result<T, RelayError>;

#[derive(Debug, Error)]
pub enum RelayError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("water-filling with positive budget {budget} but every weight is zero")]
    DegenerateWeights { budget: f64 },

    #[error("target rate {target} exceeds the rate {achievable} achievable within the budget cap")]
    InfeasibleTarget { target: f64, achievable: f64 },

    #[error("dual point falls in no admissible case (beta_1 = {beta_1}, nu_N = {nu_last})")]
    CaseInconsistency { beta_1: f64, nu_last: f64 },

    #[error("{case} recovery failed: {reason}")]
    RecoveryFailure { case: CaseTag, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("grid-search oracle supports N <= 4, got N = {0}")]
    UnsupportedSize(usize),

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RelayError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        RelayError::Parameter(msg.into())
    }

    /// I/O failure tagged with the path involved.
    pub fn io_at(path: &std::path::Path, e: std::io::Error) -> Self {
        RelayError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        RelayError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Stable machine-readable category, printed by the CLI on failure.
    pub fn category(&self) -> &'static str {
        match self {
            RelayError::Parameter(_)
            | RelayError::DegenerateWeights { .. }
            | RelayError::InfeasibleTarget { .. }
            | RelayError::Precondition(_) => "parameter",
            RelayError::CaseInconsistency { .. } | RelayError::RecoveryFailure { .. } => "solver",
            RelayError::UnsupportedSize(_) => "unsupported",
            RelayError::Config { .. } => "config",
            RelayError::Parse(_) => "parse",
            RelayError::Io(_) => "io",
        }
    }

    /// Process exit code for the CLI. 0 is success and 2 is a usage error.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "config" => 3,
            "parameter" => 4,
            "solver" => 5,
            "unsupported" => 6,
            "parse" => 7,
            "io" => 8,
            _ => 1,
        }
    }
}
