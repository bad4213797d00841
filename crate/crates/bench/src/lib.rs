//! Inputs shared by the benchmarks.

use klanon::hardgen::random_graph;
use klanon::Graph;

/// Sparse G(n, p) with average degree near `avg_degree`, with every
/// isolated vertex tied to its successor so strong variants apply.
pub fn sparse_connected(n: usize, avg_degree: f64, seed: u64) -> Graph {
    let mut g = random_graph(n, avg_degree / n as f64, seed);
    for v in 0..n {
        if g.degree(v) == 0 {
            let u = (v + 1) % n;
            g.add_edge(v, u).expect("isolated vertex has no edges");
        }
    }
    g
}
