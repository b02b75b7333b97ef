use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("expected {expected} entries for the given shape, got {got}")]
    EntryCount { expected: usize, got: usize },

    #[error("column {0} has (near) zero norm")]
    ZeroColumn(usize),

    #[error("matrix columns are not normalized")]
    NotNormalized,

    #[error("statistic requested over {requested} values but only {available} are available")]
    ProfileTooShort { requested: usize, available: usize },

    #[error("no rows left after exclusion")]
    NoRowsLeft,

    #[error("coherence {0} is outside [0, 1]")]
    InvalidMu(f64),

    #[error("bad row selection: {0}")]
    BadSelection(String),

    #[error("not a graph Laplacian: {0}")]
    NotALaplacian(String),

    #[error("eigendecomposition did not converge")]
    EigenFailure,

    #[error("enumeration of {required} column subsets exceeds budget {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("2K = {two_k} columns cannot have full rank with only {rows} rows")]
    RankImpossible { two_k: usize, rows: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("support {0:?} gives a rank-deficient submatrix")]
    RankDeficientSupport(Vec<usize>),

    #[error("unknown {what} '{name}'")]
    Unknown { what: &'static str, name: String },

    #[error("usage: {0}")]
    Usage(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
