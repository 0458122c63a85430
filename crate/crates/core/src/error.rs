use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point {index} has non-positive camera depth {depth}")]
    BehindCamera { index: usize, depth: f64 },

    #[error("matrix is not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("matrix is singular (determinant {determinant:e})")]
    Singular { determinant: f64 },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("solver did not converge after {iterations} iterations (last step {step:e})")]
    Divergence { iterations: usize, step: f64 },

    #[error("frame mismatch: {0}")]
    FrameMismatch(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported dataset version {found:?} on line {line}")]
    Version { line: usize, found: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Errors raised by the numerics rather than by malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::BehindCamera { .. }
                | Error::NotOrthonormal { .. }
                | Error::Singular { .. }
                | Error::Degenerate(_)
                | Error::Divergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
