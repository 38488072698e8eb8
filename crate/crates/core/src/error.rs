use thiserror::Error;

pub type Result<T> = std::result::Result<T, QgError>;

#[derive(Debug, Error)]
pub enum QgError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("cell index ({i}, {j}) outside a {nx}x{ny} grid")]
    IndexOutOfRange { i: usize, j: usize, nx: usize, ny: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("reference field has zero norm")]
    ZeroNorm,

    #[error("non-finite value in {what} at cell ({i}, {j})")]
    NonFinite { what: String, i: usize, j: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "{step}: linear solve did not converge after {iterations} iterations \
         (relative residual {residual:e})"
    )]
    NotConverged {
        step: String,
        iterations: usize,
        residual: f64,
    },

    #[error("{method} breakdown at iteration {iteration}: {reason}")]
    Breakdown {
        method: &'static str,
        iteration: usize,
        reason: &'static str,
    },

    #[error("no samples fell inside the averaging window [{start}, {end}]")]
    EmptyWindow { start: f64, end: f64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Process exit codes of the command-line front end.
pub mod exit {
    pub const GENERIC: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NOT_CONVERGED: i32 = 3;
    pub const NON_FINITE: i32 = 4;
    pub const IO: i32 = 5;
}

impl QgError {
    pub fn exit_code(&self) -> i32 {
        match self {
            QgError::Config { .. } | QgError::Parse { .. } | QgError::InvalidParameter(_) => exit::CONFIG,
            QgError::NotConverged { .. } | QgError::Breakdown { .. } => exit::NOT_CONVERGED,
            QgError::NonFinite { .. } => exit::NON_FINITE,
            QgError::File { .. } | QgError::Io(_) => exit::IO,
            _ => exit::GENERIC,
        }
    }

    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        QgError::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        QgError::File {
            path: path.display().to_string(),
            source,
        }
    }
}
