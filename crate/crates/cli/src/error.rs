use thiserror::Error;

/// Errors of a command run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at line {line}: {msg}")]
    ConfigAt { line: usize, msg: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Solver {
        context: String,
        #[source]
        source: loopbie::Error,
    },
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// `2` for configuration and input errors, `3` for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver { source, .. } if !source.is_input_error() => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Attaches a module context to library errors.
pub trait Context<T> {
    fn context(self, what: &str) -> Result<T>;
}

impl<T> Context<T> for loopbie::Result<T> {
    fn context(self, what: &str) -> Result<T> {
        self.map_err(|source| CliError::Solver {
            context: what.to_string(),
            source,
        })
    }
}
