use crate::check::{residual, strong_residual, AnonParams, Mode};
use crate::graph::{Edge, Graph};

/// One iteration of a greedy anonymizer: the edges it added and the residual
/// anonymity before and after.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub edges: Vec<Edge>,
    pub residual_before: usize,
    pub residual_after: usize,
}

/// The output of every anonymizer: which edges were added, in order, and the
/// resulting graph with before/after residual anonymity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePlan {
    pub added_edges: Vec<Edge>,
    pub result: Graph,
    pub residual_before: usize,
    pub residual_after: usize,
    /// Per-iteration record for greedy algorithms; empty otherwise.
    pub trace: Vec<TraceStep>,
}

impl EdgePlan {
    /// Applies `added` to `g` and measures residuals in the given mode.
    ///
    /// Panics if an added edge already exists; anonymizers only propose non-edges.
    pub fn build(g: &Graph, added: Vec<Edge>, p: AnonParams, mode: Mode) -> Self {
        let mut result = g.clone();
        for &(u, v) in &added {
            result
                .add_edge(u, v)
                .unwrap_or_else(|e| panic!("anonymizer proposed invalid edge: {e}"));
        }
        let (before, after) = match mode {
            Mode::Weak => (residual(g, p).total, residual(&result, p).total),
            Mode::Strong => (
                strong_residual(g, g, p).expect("same graph").total,
                strong_residual(g, &result, p).expect("superset").total,
            ),
        };
        EdgePlan {
            added_edges: added,
            result,
            residual_before: before,
            residual_after: after,
            trace: Vec::new(),
        }
    }

    pub fn edge_count(&self) -> usize {
        self.added_edges.len()
    }

    /// Number of added edges incident to each vertex.
    pub fn added_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.result.vertex_count()];
        for &(u, v) in &self.added_edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }
}
