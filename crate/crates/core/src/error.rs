use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("not normalized: squared norm {norm_sqr} deviates from 1 by more than {tolerance:e}")]
    Normalization { norm_sqr: f64, tolerance: f64 },
    #[error("state is not entangled: {0}")]
    NotEntangled(String),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
