use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty complement")]
    EmptyComplement,

    #[error("empty supported set")]
    EmptySupported,

    #[error("degenerate chord: both endpoints are {0}")]
    DegenerateChord(f64),

    #[error("invalid complement model: {0}")]
    InvalidModel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("epsilon must be positive for analytic complements")]
    EpsilonRequired,

    #[error("complement density is not unimodal; use the iterative solver")]
    NotUnimodal,

    #[error("instance exceeds the oracle size guard: {0}")]
    OracleTooLarge(String),

    #[error("oracle requires empirical complement")]
    OracleNeedsEmpirical,

    #[error("score {0} is not collinear in this solution")]
    NotCollinear(f64),

    #[error("invariant violated: {0}")]
    Invariant(String),
}
