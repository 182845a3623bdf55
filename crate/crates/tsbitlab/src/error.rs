use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("index {index} out of range for length {len}")]
    Index { index: usize, len: usize },

    #[error("no feasible sequence: {0}")]
    Infeasible(String),

    #[error("enumeration budget exceeded: {candidates} candidates > {budget}")]
    Budget { candidates: u64, budget: u64 },
}
