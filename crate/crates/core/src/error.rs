use thiserror::Error;

use crate::graph::Vertex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("edge ({0}, {1}) already present")]
    DuplicateEdge(Vertex, Vertex),
    #[error("vertex {vertex} out of range for graph with {vertex_count} vertices")]
    VertexOutOfRange { vertex: Vertex, vertex_count: usize },
    #[error("common neighbors of a vertex with itself are undefined (vertex {0})")]
    SameVertex(Vertex),
    #[error("graphs have different vertex counts ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("edge ({0}, {1}) of the original graph is missing from the transformed graph")]
    NotSuperset(Vertex, Vertex),
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("graph too small: {0}")]
    TooSmall(String),
    #[error("vertex {0} is isolated; strong anonymization is infeasible")]
    IsolatedVertex(Vertex),
    #[error("vertices with fewer than {ell} original neighbors: {vertices:?}")]
    DegreeTooLow { ell: usize, vertices: Vec<Vertex> },
    #[error("no candidate reduces the residual anonymity (residual {0})")]
    Stuck(usize),
    #[error("search budget exceeded after examining {explored} candidate sets")]
    BudgetExceeded { explored: u64 },
    #[error("instance is not normalized: {0}")]
    NotNormalized(String),
    #[error("triple count {0} is not a positive multiple of 6")]
    BadTripleCount(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
