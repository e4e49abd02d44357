use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spin label 2J={0} outside the supported range 1..={max}", max = crate::spin::MAX_TWO_J)]
    InvalidSpin(i32),
    #[error("invalid (J, m) pair: 2J={two_j}, 2m={two_m}")]
    InvalidPair { two_j: i32, two_m: i32 },
    #[error("expected {expected} amplitudes for 2J={two_j}, got {got}")]
    DimensionMismatch {
        two_j: i32,
        expected: usize,
        got: usize,
    },
    #[error("amplitude {index} is not finite")]
    NonFinite { index: usize },
    #[error("state has zero norm")]
    ZeroVector,
    #[error("spin mismatch: 2J={left} vs 2J={right}")]
    SpinMismatch { left: i32, right: i32 },
    #[error("operation requires J=1, got 2J={0}")]
    WrongSpin(i32),
    #[error("grid sizes must be at least 2 (n_theta={n_theta}, n_phi={n_phi})")]
    BadGridSize { n_theta: usize, n_phi: usize },
    #[error("exponent p={0} is out of range")]
    BadExponent(f64),
    #[error("finite-difference step h={0} must lie in (0, 0.1]")]
    BadStep(f64),
    #[error("argument out of domain: {0}")]
    DomainError(String),
    #[error("no convergence after {0} terms")]
    NoConvergence(usize),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
