use thiserror::Error;

/// Errors raised by the numerical kernel and the protocol layers built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {op} got {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("entry buffer has length {len}, expected {expected}")]
    BadEntryCount { len: usize, expected: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("result would have {entries} entries, above the limit of {limit}")]
    DimensionOverflow { entries: u128, limit: u128 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("matrix is not Hermitian: max |M - M†| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace}, expected 1")]
    NotUnitTrace { trace: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("kets are not orthonormal: Gram deviation {deviation:e}")]
    NonOrthonormal { deviation: f64 },

    #[error("expectation value has imaginary part {imag:e}")]
    ComplexExpectation { imag: f64 },

    #[error("basis index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("singlet indices must satisfy 1 <= i < j <= {dim}, got ({i}, {j})")]
    InvalidSingletIndices { dim: usize, i: usize, j: usize },

    #[error("local dimension {d} is below the minimum of {min}")]
    DimensionTooSmall { d: usize, min: usize },

    #[error("local dimension {d} exceeds the configured cap of {cap}")]
    DimensionTooLarge { d: usize, cap: usize },

    #[error("invalid dimension range {d_min}..={d_max}")]
    InvalidRange { d_min: usize, d_max: usize },

    #[error("invalid projective measurement: {reason}")]
    InvalidMeasurement { reason: String },

    #[error("every measurement branch fell below the pruning threshold")]
    AllBranchesPruned,

    #[error("conditioning on a null event (probability {probability:e})")]
    NullEvent { probability: f64 },

    #[error("invalid CHSH settings: {reason}")]
    InvalidSettings { reason: String },

    #[error("at least one trial is required")]
    NoTrials,

    #[error("invalid hidden-variable model: {reason}")]
    InvalidModel { reason: String },

    #[error("model has zero outcomes; use the post-selected evaluator")]
    ZeroOutcome,

    #[error("setting pair ({alice}, {bob}) has an empty post-selected subensemble")]
    EmptySelection { alice: usize, bob: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
