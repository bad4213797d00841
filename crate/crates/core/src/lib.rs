//! Edge-addition (k,ℓ)-anonymization of simple undirected graphs.

pub mod approx;
pub mod check;
pub mod error;
pub mod exact21;
pub mod graph;
pub mod greedy;
pub mod hardgen;
pub mod io;
pub mod matching;
pub mod oracle;
pub mod plan;
mod tracker;

pub use check::{AnonParams, Mode, ResidualReport};
pub use error::{Error, Result};
pub use graph::{Edge, Graph, Vertex, VertexSet};
pub use plan::{EdgePlan, TraceStep};
