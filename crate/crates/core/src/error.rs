use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{context}: expected dimension {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{context}: expected shape {expected:?}, found {found:?}")]
    Shape {
        context: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix has a negative entry")]
    NegativeEntry,

    #[error("matrix is singular")]
    Singular,

    #[error("range error: {0}")]
    Range(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("integration diverged at t = {t}")]
    Divergence { t: f64 },

    #[error("dynamics matrix has zero norm; use the zero-norm limit explicitly")]
    DegenerateDynamics,

    #[error("certificate matrix P is not symmetric")]
    NotSymmetric,

    #[error("certificate matrix P is not positive definite (min eigenvalue {min_eig})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error(
        "quantizer overflow at step {k}, axis {axis}: value {value} outside [{lower}, {upper}]"
    )]
    Overflow {
        k: u64,
        axis: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("packet index {index} on axis {axis} out of range for {levels} levels")]
    IndexOutOfRange {
        axis: usize,
        index: u32,
        levels: u32,
    },

    #[error("{scheme} scheme infeasible: condition value {lhs} is not below 1")]
    Infeasible { scheme: &'static str, lhs: f64 },

    #[error("norm-based scheme requires equal ranges on all axes")]
    UnequalRanges,

    #[error("trace too short: {have} transmissions, need at least {need}")]
    TraceTooShort { have: usize, need: usize },

    #[error("signal bound violated at t = {t}: {what} = {value} exceeds {bound}")]
    SignalBound {
        t: f64,
        what: &'static str,
        value: f64,
        bound: f64,
    },

    #[error("{0}")]
    Config(String),

    #[error("line {line}: field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
