use thiserror::Error;

use crate::conic::SolveStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("rank-deficient channel matrix (rank {rank} < {needed})")]
    RankDeficient { rank: usize, needed: usize },

    #[error("degenerate effective gain {gain:e} in cluster {cluster}")]
    DegenerateGain { cluster: usize, gain: f64 },

    #[error("degenerate slack initialization: log argument {value:e} for {what}")]
    DegenerateSlack { what: String, value: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("ambiguous decision: superposed constellation points coincide")]
    DecisionTie,

    #[error("no weak-user signal (p2 = 0)")]
    NoWeakSignal,

    #[error("non-finite input")]
    NonFinite,

    #[error("too few users: need {needed}, have {have}")]
    TooFewUsers { needed: usize, have: usize },

    #[error("conic subproblem failed at iteration {iteration}: {status:?}")]
    Subproblem { iteration: usize, status: SolveStatus },

    #[error("cluster {cluster}: {source}")]
    Cluster {
        cluster: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("infeasible instance: strong-user SNR constraint of cluster {cluster} violated by {violation:e}")]
    Infeasible { cluster: usize, violation: f64 },

    #[error("conic program parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
