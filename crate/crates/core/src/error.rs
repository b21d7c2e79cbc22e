use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("non-manifold mesh: {0}")]
    NonManifold(String),
    #[error("inconsistent face orientation across edge ({0}, {1})")]
    InconsistentOrientation(u32, u32),
    #[error("mesh is not a closed genus-0 surface (Euler characteristic {0})")]
    NonzeroGenus(i64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("iteration did not converge: {0}")]
    NotConverged(String),
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// True for errors caused by the input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Numerical(_) | Error::NotConverged(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
