use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit can report.
///
/// The variants map one-to-one onto the CLI exit-code contract: usage
/// problems are handled by the argument parser, everything here is a
/// domain failure (exit code 1).
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "signal {signal:.6} is outside the bracket image [{lo_signal:.6}, {hi_signal:.6}]; \
         the assumed scene parameters cannot explain the measurement"
    )]
    Bracket {
        signal: f64,
        lo_signal: f64,
        hi_signal: f64,
    },

    #[error("bisection did not converge within {max_iterations} iterations")]
    Convergence { max_iterations: usize },

    #[error("lookup error: {0}")]
    Lookup(String),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Training { epoch: usize },

    #[error("parse error at byte offset {offset}: {message}")]
    Parse { offset: u64, message: String },

    #[error("shape error in layer {layer}: {message}")]
    Shape { layer: usize, message: String },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
