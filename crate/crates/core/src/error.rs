use thiserror::Error;

pub type Result<T> = std::result::Result<T, DmtError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DmtError {
    #[error("invalid channel configuration: {0}")]
    InvalidConfig(String),

    #[error("index k = {k} outside 0..={n}")]
    IndexOutOfRange { k: usize, n: usize },

    #[error("multiplexing gain r = {r} outside [0, {n}]")]
    GainOutOfRange { r: f64, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("vector length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("matrix contains non-finite entries")]
    NonFiniteMatrix,

    #[error("degenerate eigenvalue b[{index}] = 0")]
    DegenerateEigenvalue { index: usize },

    #[error("grid oracle supports at most 4 receive antennas, got N = {0}")]
    OracleTooLarge(usize),

    #[error("rate adaptation baseline is only defined for N = 1, got N = {0}")]
    NotSingleAntenna(usize),
}
