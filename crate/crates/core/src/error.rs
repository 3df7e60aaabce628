use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("node {node} out of range (graph has {node_count} nodes)")]
    NodeOutOfRange { node: u32, node_count: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rumor set is invalid: {0}")]
    InvalidRumorSet(String),

    #[error("protector set is invalid: {0}")]
    InvalidProtectorSet(String),

    #[error("no sampled walk reaches the rumor set within the walk length")]
    RumorUnreachable,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("unsupported store format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
