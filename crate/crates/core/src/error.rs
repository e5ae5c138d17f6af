use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("structural mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("enumeration needs {required} items, cap is {cap}")]
    EnumerationCap { required: u128, cap: u128 },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("linear program: {0}")]
    Numerical(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("seed exhausted: needed more bits after drawing {drawn}")]
    SeedExhausted { drawn: u64 },
    #[error("construction failed: {0}")]
    Construction(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
