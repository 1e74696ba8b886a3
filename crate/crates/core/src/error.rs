use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// A mathematical precondition of the requested operation does not hold.
    Precondition,
    /// Reading or writing an external resource failed.
    Io,
    /// A name lookup (strategy, suite) failed.
    Lookup,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("gcd({p}, {q}) = {gcd}, expected a coprime pair")]
    NotCoprime { p: i64, q: i64, gcd: i64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("weight {weight} = {i} + {j} is odd; an even weight is required")]
    OddWeight { i: u32, j: u32, weight: u32 },

    #[error("weight {0} has no explicit table (supported: 4, 6)")]
    UnsupportedWeight(u32),

    #[error("{0} is not a squarefree integer > 1")]
    NotSquarefree(i64),

    #[error("expected an irrational quadratic surd, got the rational {0}")]
    RationalSurd(String),

    #[error("basis is not stable under multiplication by the unit inverse: {0}")]
    NonInvariantBasis(String),

    #[error("basis orientation: -beta/alpha must exceed its conjugate")]
    BasisOrientation,

    #[error("matrix {0} is not usable here: {1}")]
    DegenerateMatrix(String, String),

    #[error("matrix entry s = {s} is not (-1)^(n-1) q_(n-1) for either expansion of {q}/{p}")]
    MatrixInconsistent { p: i64, q: i64, s: i64 },

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("unknown {kind} '{name}' (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io(_) | Error::Csv(_) => ErrorKind::Io,
            Error::UnknownStrategy { .. } => ErrorKind::Lookup,
            _ => ErrorKind::Precondition,
        }
    }
}
