use thiserror::Error;

use crate::tensor::MAX_DIM;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("duplicate label `{0}` in layout")]
    DuplicateLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("factor `{0}` has zero dimension")]
    ZeroDimension(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("requested order is not a permutation of the layout labels")]
    NotAPermutation,
    #[error("space of dimension {0} exceeds the dense limit of {MAX_DIM}")]
    TooLarge(usize),
    #[error("operator is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("operator has a significantly negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("label `{0}` appears in both operators but is not connected")]
    OverlappingLabel(String),
    #[error("comb normalization violated at level {level} (residual {residual:e})")]
    CombViolation { level: usize, residual: f64 },
    #[error("stage chain mismatch: {0}")]
    ChainMismatch(String),
    #[error("(x, y) = ({x}, {y}) misses x^2 + y^2 + 2xy/d = 1 by {residual:e}")]
    Constraint { x: f64, y: f64, residual: f64 },
    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("outcome operator leaks outside the support of the total comb ({0:e})")]
    SupportViolation(f64),
    #[error("top eigenspace does not meet span{{|a>, |b>}} (best overlap {0})")]
    OutsideSpan(f64),
    #[error("singular intermediate at realization level {0}")]
    Singular(usize),
    #[error("only the maximally mixed input state is supported here")]
    UnsupportedInput,
}
