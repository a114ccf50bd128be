use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("grid side must be at least 2, got {0}")]
    GridTooSmall(usize),

    #[error("subband layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("transform is not translation invariant")]
    NotTranslationInvariant,

    #[error("conjugate gradient breakdown at iteration {iteration} (curvature {curvature:e}); operator is not positive definite")]
    CgBreakdown { iteration: usize, curvature: f64 },

    #[error("non-finite value in `{variable}` at outer iteration {iteration}")]
    NonFinite { iteration: usize, variable: &'static str },

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::SizeMismatch { expected, found })
    }
}
