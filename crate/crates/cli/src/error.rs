use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad or missing flags.
    #[error("usage: {0}")]
    Usage(String),
    /// A file that cannot be read or written.
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    /// A file whose contents do not parse.
    #[error("{path}: malformed {what}: {message}")]
    Format { path: String, what: &'static str, message: String },
    #[error("{0}")]
    Pipeline(String),
}

impl CliError {
    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.display().to_string(), message: e.to_string() }
    }

    pub fn format(path: &std::path::Path, what: &'static str, e: impl std::fmt::Display) -> Self {
        CliError::Format { path: path.display().to_string(), what, message: e.to_string() }
    }

    /// 2 for usage and input problems, 3 for malformed files.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Format { .. } => 3,
            CliError::Usage(_) | CliError::Io { .. } | CliError::Pipeline(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
