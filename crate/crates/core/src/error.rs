use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("label space exhausted: {requested} labels requested, capacity is {capacity}")]
    LabelCapacity { requested: usize, capacity: usize },

    #[error("nodes {0} and {1} are not connected")]
    Disconnected(NodeId, NodeId),

    #[error("direction is undefined: target coincides with the ray origin")]
    UndefinedDirection,

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("task generation failed: {0}")]
    TaskGeneration(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("missing scene for graph {0}")]
    MissingScene(usize),

    #[error("io error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
