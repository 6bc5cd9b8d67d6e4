use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("weight mismatch: expected {expected}, found {found}")]
    WeightMismatch { expected: usize, found: usize },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("element is not in the group")]
    NotInGroup,
    #[error("{what} needs {size} items, over the cap of {cap}")]
    CapExceeded { what: &'static str, size: u128, cap: u128 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate standard deviation")]
    DegenerateSd,
    #[error("under-sampled: smallest expected cell count {min_expected:.3} < 5")]
    UnderSampled { min_expected: f64 },
}

impl Error {
    pub fn is_cap_exceeded(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
