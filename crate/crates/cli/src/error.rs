use std::fmt;
use std::path::Path;

use fate_core::FateError;
use serde::Serialize;

/// Error reported on stderr as `{"error": {"kind", "message"}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CliError {
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &str, message: impl Into<String>) -> Self {
        CliError { kind: kind.into(), message: message.into() }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::new("IoError", format!("{}: {err}", path.display()))
    }

    pub fn schema(path: &Path, message: impl fmt::Display) -> Self {
        CliError::new("SchemaError", format!("{}: {message}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<FateError> for CliError {
    fn from(e: FateError) -> Self {
        CliError::new(e.kind(), e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
