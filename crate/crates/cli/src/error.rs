use std::path::Path;

use qnm_usc_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown or misplaced keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error("{context}: {source}")]
    Core { context: String, source: CoreError },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.display().to_string(), message: e.to_string() }
    }

    pub fn core(context: impl Into<String>, source: CoreError) -> Self {
        CliError::Core { context: context.into(), source }
    }

    /// Process exit status: 2 for configuration/input problems, 3 for physics
    /// errors, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source, .. } if source.is_physics() => 3,
            CliError::Core { source, .. } if source.is_numerical() => 4,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            3 => "physics",
            4 => "numerical",
            _ => "config",
        }
    }

    pub fn report(&self) -> serde_json::Value {
        serde_json::json!({ "error": self.kind(), "exit_code": self.exit_code(), "message": self.to_string() })
    }
}

pub trait Context<T> {
    fn context(self, ctx: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, CoreError> {
    fn context(self, ctx: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|e| CliError::core(ctx(), e))
    }
}
