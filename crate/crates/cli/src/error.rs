use std::path::PathBuf;

use serde_json::{json, Value};
use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error("malformed {what} at line {line}: {message}")]
    Format {
        what: &'static str,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("characteristics cross at zeta = {zeta} (entry tau = {tau0}); adiabatic solution stops at zeta = {reached}")]
    Shock { zeta: f64, tau0: f64, reached: f64 },

    #[error(transparent)]
    Core(#[from] adiabaton::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn validation(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "PARSE_ERROR",
            CliError::Validation { .. } => "VALIDATION_ERROR",
            CliError::Format { .. } => "FORMAT_ERROR",
            CliError::Io { .. } => "IO_ERROR",
            CliError::Shock { .. } => "SHOCK",
            CliError::Core(e) => e.code(),
        }
    }

    /// Process exit status: 2 for bad input, 3 for I/O, 1 for failed runs.
    pub fn exit_status(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation { .. } | CliError::Format { .. } => 2,
            CliError::Io { .. } => 3,
            CliError::Shock { .. } | CliError::Core(_) => 1,
        }
    }

    /// Machine-readable record written to stderr on failure.
    pub fn record(&self) -> Value {
        let mut r = json!({ "code": self.code(), "message": self.to_string() });
        let extra = match self {
            CliError::Parse { line, column, .. } => json!({ "line": line, "column": column }),
            CliError::Validation { key, .. } => json!({ "key": key }),
            CliError::Format { what, line, .. } => json!({ "document": what, "line": line }),
            CliError::Io { path, .. } => json!({ "path": path }),
            CliError::Shock {
                zeta,
                tau0,
                reached,
            } => json!({ "zeta_shock": zeta, "tau0": tau0, "zeta_reached": reached }),
            CliError::Core(adiabaton::Error::Aborted { zeta, .. }) => json!({ "zeta": zeta }),
            CliError::Core(adiabaton::Error::Infeasible { tau, .. }) => json!({ "tau": tau }),
            CliError::Core(_) => json!({}),
        };
        if let (Some(r), Value::Object(extra)) = (r.as_object_mut(), extra) {
            r.extend(extra);
        }
        json!({ "error": r })
    }
}
