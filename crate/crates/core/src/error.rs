use thiserror::Error;

/// Errors raised by the numerical kernels and drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma pole at x = {0}")]
    Pole(f64),
    #[error("singular input: {0}")]
    SingularInput(String),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("root not bracketed: {0}")]
    Bracket(String),
}

pub type Result<T> = std::result::Result<T, Error>;
