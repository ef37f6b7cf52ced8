use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A constructor precondition does not hold; the message names it.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("exact bottom probabilities unavailable: m = {m} needs {states} DP states (limit {limit})")]
    ExactPathUnavailable { m: usize, states: u128, limit: usize },

    #[error("malformed profile: {0}")]
    MalformedProfile(String),

    #[error("pruning removed every candidate")]
    EmptyCandidateSet,

    #[error("equilibrium solver did not converge: gap {gap:e} after {iterations} iterations")]
    NonConvergence { gap: f64, iterations: usize },

    #[error("no Condorcet loser at margin tolerance {tau:e}")]
    NoCondorcetLoser { tau: f64 },

    #[error("unknown rule `{0}`")]
    UnknownRule(String),

    #[error("rule `{0}` is not supported here")]
    UnsupportedRule(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
