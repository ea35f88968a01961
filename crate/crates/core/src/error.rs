//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{context}: dimension mismatch (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("split with fraction {fraction} leaves the {side} side empty (N = {n})")]
    EmptySplit {
        side: &'static str,
        fraction: f64,
        n: usize,
    },

    #[error("subproblem diverged at lambda = {lambda}")]
    SubproblemDiverged { lambda: f64 },

    #[error("ladmm requires eta > L_f (eta = {eta}, L_f = {lipschitz_f})")]
    EtaTooSmall { eta: f64, lipschitz_f: f64 },

    #[error("semi-smooth Newton stalled after {max_iter} iterations")]
    NewtonStalled { max_iter: usize },

    #[error("rate bound requires a constant-penalty trace")]
    AdaptivePenaltyTrace,

    #[error("rate bound requires rho > (sqrt(3)+1)*L_f (rho = {rho}, L_f = {lipschitz_f})")]
    PenaltyBelowThreshold { rho: f64, lipschitz_f: f64 },

    #[error("trace rows do not carry averaged-iterate objectives")]
    MissingAveragedObjective,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
