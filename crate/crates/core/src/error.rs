use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch between {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{op}: {rows}x{cols} exceeds the size cap of {cap}")]
    SizeCap {
        op: &'static str,
        rows: usize,
        cols: usize,
        cap: usize,
    },

    #[error("{op}: expected a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e}, tolerance {tolerance:e})")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("matrix is not an involution (max |A^2 - I| = {deviation:e})")]
    NotInvolution { deviation: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("{what} did not converge after {iterations} iterations (best estimate {estimate})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        estimate: f64,
    },

    #[error("a trace-zero sign diagonal requires an even dimension, got {0}")]
    OddDimension(usize),

    #[error("truncated free observables are defined on odd dimensions 2l+1 >= 3, got {0}")]
    NotOddDimension(usize),

    #[error("word {0:?} is not alternating (adjacent indices must differ)")]
    NotAlternating(Vec<usize>),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("symbolic expansion exceeded {cap} terms; use the walk-count recursion instead")]
    TermCap { cap: usize },

    #[error("{what}: {value} exceeds the cap of {cap}")]
    ArgumentCap {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("{0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures of an iterative numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. })
    }
}
