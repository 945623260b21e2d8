use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown lattice `{name}` with weighting scheme `{scheme}`")]
    UnknownLattice { name: String, scheme: String },

    #[error("invalid lattice description: {0}")]
    InvalidLattice(String),

    #[error("coordinate {0} is not a vertex of the lattice")]
    NotOnLattice(String),

    #[error("walk is not valid on this lattice: {0}")]
    InvalidWalk(String),

    #[error("enumeration budget of {budget} exceeded")]
    BudgetExceeded { budget: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("term {term} is not divisible by {divisor}")]
    NotDivisible { term: String, divisor: String },

    #[error("polynomial evaluation overflowed to infinity")]
    EvalOverflow,

    #[error("weights must be finite and strictly positive, got {0:?}")]
    NonPositiveWeight(Vec<f64>),

    #[error("step counts must satisfy m < n (got m = {m}, n = {n})")]
    InvalidStepCounts { m: usize, n: usize },

    #[error("matrix is not primitive; the eigenvalue bound does not apply")]
    NotPrimitive,

    #[error("power iteration did not converge after {iterations} iterations (bracket [{lower}, {upper}])")]
    NoConvergence {
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    #[error("power iteration hit a zero vector; the input matrix is reducible")]
    ZeroVector,

    #[error("malformed matrix file: {0}")]
    Malformed(String),

    #[error("unsupported matrix file version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("matrix file checksum mismatch")]
    ChecksumMismatch,

    #[error("unknown closed-form row `{0}`")]
    UnknownClosedForm(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("{0}")]
    Precondition(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
