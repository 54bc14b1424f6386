use thiserror::Error;

/// Every fallible operation in the crate returns this error.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimensionality mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch(Vec<usize>, Vec<usize>),
    #[error("empty tensor")]
    Empty,
    #[error("{count} elements do not fill shape {shape:?}")]
    ElementCount { shape: Vec<usize>, count: usize },
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("expected an {0} tensor")]
    Mode(&'static str),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 2 for I/O, 3 for domain violations, 4 for numerical trouble.
    /// Usage errors (code 1) are raised by the argument parser before any of these.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Parse(_) => 2,
            Error::Numerical(_) | Error::Overflow(_) => 4,
            _ => 3,
        }
    }
}
