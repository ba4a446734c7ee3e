use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key `{key}` in [{section}]")]
    UnknownKey {
        line: usize,
        section: &'static str,
        key: String,
    },
    #[error("missing required section [{section}]")]
    MissingSection { section: &'static str },
    #[error("[{origin}] {message}")]
    Semantic {
        origin: &'static str,
        message: String,
    },
    #[error("plots require planar states (dimension 2), got dimension {dim}")]
    UnsupportedPlot { dim: usize },
    #[error("nothing to export: trajectory is empty")]
    EmptyTrajectory,
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        CliError::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn unknown_key(line: usize, section: &'static str, key: &str) -> Self {
        CliError::UnknownKey {
            line,
            section,
            key: key.to_string(),
        }
    }

    /// Process exit code: 2 for usage and syntax problems, 1 for semantic
    /// validation failures and runtime errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } | CliError::UnknownKey { .. } => 2,
            _ => 1,
        }
    }
}
