use thiserror::Error;

use crate::graph::Node;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition (bad sets, shapes, parameters).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("node {0} is not part of the graph")]
    UnknownNode(Node),

    #[error("graph contains a directed cycle: {}", format_cycle(.0))]
    Cycle(Vec<Node>),

    #[error("graph is disconnected; maximum spanning tree is undefined")]
    Disconnected,

    #[error("sets must be pairwise disjoint (node {0} appears twice)")]
    Overlap(Node),

    #[error("invalid R-vine matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid vine tree sequence: {0}")]
    InvalidVine(String),

    #[error("invalid pair-copula parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_cycle(cycle: &[Node]) -> String {
    cycle
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" -> ")
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by bad user input rather than runtime failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
