use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis matrix is singular")]
    SingularBasis,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{what} budget exceeded: needed {needed}, limit {limit}")]
    Budget {
        what: &'static str,
        needed: u64,
        limit: u64,
    },

    #[error("tail certificate {achieved:e} cannot reach tolerance {requested:e} within budget")]
    TailBudget { achieved: f64, requested: f64 },

    #[error("unknown letter {0:?}")]
    UnknownLetter(String),

    #[error("group ball not saturated at cutoff {cutoff}")]
    Unsaturated { cutoff: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("family member n={n}: {source}")]
    AtMember { n: u64, source: Box<Error> },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Process exit code used by the experiment runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Budget { .. } | Error::TailBudget { .. } | Error::Unsaturated { .. } => 3,
            Error::Invariant(_) => 4,
            Error::Io(_) => 1,
            Error::AtMember { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
