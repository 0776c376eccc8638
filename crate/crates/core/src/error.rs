use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: P^{left} vs P^{right}")]
    DimensionMismatch { left: u32, right: u32 },

    #[error("pairing matrix is singular")]
    SingularMatrix,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unstable configuration: {0}")]
    UnstableKey(String),

    #[error("no reduction rule applies to {0}")]
    IrreducibleConfiguration(String),

    #[error("oracle has no entry for d={d}, l={l}, k={k}")]
    MissingOracleEntry { d: u32, l: u32, k: u32 },

    #[error("oracle table: {0}")]
    Oracle(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
