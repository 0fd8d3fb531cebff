use thiserror::Error;

pub type Result<T> = std::result::Result<T, MilpError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MilpError {
    #[error("model is malformed: {0}")]
    Malformed(String),
    #[error("problem is infeasible")]
    Infeasible,
    #[error("problem is unbounded")]
    Unbounded,
    #[error("simplex iteration limit ({0}) reached")]
    IterationLimit(usize),
    #[error("numerical trouble: {0}")]
    Numerical(String),
    #[error("resource limit reached before any feasible point was found")]
    ResourceLimit,
    #[error("external solver failed: {0}")]
    External(String),
}
