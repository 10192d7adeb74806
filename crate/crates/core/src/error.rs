use thiserror::Error;

/// Errors raised by the tree laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("branching factor must be at least 2, got {0}")]
    InvalidBranching(u32),

    #[error("invalid vertex: {0}")]
    InvalidVertex(String),

    #[error("materializing depth {depth} needs {nodes} nodes, budget is {budget}")]
    BudgetExceeded { depth: usize, nodes: u128, budget: u128 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    #[error("no decay certificate within horizon {horizon}: {detail}")]
    Horizon { horizon: usize, detail: String },

    #[error("cannot parse weight descriptor `{0}`")]
    WeightDescriptor(String),

    #[error("value not representable in the requested scalar type: {0}")]
    NotRepresentable(String),

    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
