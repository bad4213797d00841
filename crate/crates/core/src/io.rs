//! Edge-list text format.
//!
//! One edge per line as two whitespace-separated tokens. Lines starting with
//! `#` are comments. The first non-comment line may be `n <count>` to declare
//! the vertex count, which is how isolated vertices survive a round trip.
//! Tokens that are all nonnegative integers are used as vertex ids directly;
//! if any token is not an integer, every token is treated as a label and
//! labels are numbered in order of first appearance.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedGraph {
    pub graph: Graph,
    /// Present when the input used non-numeric labels; `labels[v]` names vertex `v`.
    pub labels: Option<Vec<String>>,
}

pub fn parse_edge_list(text: &str) -> Result<ParsedGraph> {
    let mut declared: Option<usize> = None;
    let mut pairs: Vec<(usize, String, String)> = Vec::new();
    let mut seen_content = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if !seen_content && tokens.len() == 2 && tokens[0] == "n" {
            let count = tokens[1].parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid vertex count {:?}", tokens[1]),
            })?;
            declared = Some(count);
            seen_content = true;
            continue;
        }
        seen_content = true;
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected two vertex tokens, found {}", tokens.len()),
            });
        }
        pairs.push((line_no, tokens[0].to_string(), tokens[1].to_string()));
    }

    let numeric = pairs
        .iter()
        .all(|(_, a, b)| a.parse::<usize>().is_ok() && b.parse::<usize>().is_ok());

    let mut edges: Vec<(usize, Edge)> = Vec::with_capacity(pairs.len());
    let mut labels = None;
    let mut count;
    if numeric {
        count = 0;
        for (line, a, b) in &pairs {
            let (u, v) = (a.parse::<usize>().unwrap(), b.parse::<usize>().unwrap());
            count = count.max(u + 1).max(v + 1);
            edges.push((*line, (u, v)));
        }
    } else {
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut names = Vec::new();
        let mut intern = |s: &String| -> usize {
            *ids.entry(s.clone()).or_insert_with(|| {
                names.push(s.clone());
                names.len() - 1
            })
        };
        for (line, a, b) in &pairs {
            let e = (intern(a), intern(b));
            edges.push((*line, e));
        }
        count = names.len();
        labels = Some(names);
    }

    if let Some(n) = declared {
        if n < count {
            return Err(Error::Parse {
                line: 0,
                message: format!("declared vertex count {n} but edges reference {count} vertices"),
            });
        }
        count = n;
        if let Some(names) = labels.as_mut() {
            while names.len() < n {
                names.push(format!("_{}", names.len()));
            }
        }
    }

    let mut graph = Graph::new(count);
    for (line, (u, v)) in edges {
        graph.add_edge(u, v).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
    }
    Ok(ParsedGraph { graph, labels })
}

/// Writes a vertex-count header followed by `edges` in the given order.
pub fn format_edges(vertex_count: usize, edges: &[Edge]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n {vertex_count}");
    for &(u, v) in edges {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn format_graph(g: &Graph) -> String {
    let edges: Vec<Edge> = g.edges().collect();
    format_edges(g.vertex_count(), &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_keeps_isolated_vertices() {
        let p = parse_edge_list("# comment\nn 5\n0 1\n1 2\n").unwrap();
        assert_eq!(p.graph.vertex_count(), 5);
        assert_eq!(p.graph.edge_count(), 2);
        assert!(p.labels.is_none());
    }

    #[test]
    fn labels_are_interned() {
        let p = parse_edge_list("alice bob\nbob carol\n").unwrap();
        assert_eq!(p.graph.vertex_count(), 3);
        assert_eq!(p.labels.unwrap(), vec!["alice", "bob", "carol"]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_edge_list("0 1\na\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err = parse_edge_list("0 1\n1 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err = parse_edge_list("3 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err:?}");
    }

    #[test]
    fn header_smaller_than_edges_rejected() {
        assert!(parse_edge_list("n 2\n0 5\n").is_err());
    }

    #[test]
    fn format_then_parse() {
        let g = Graph::path(4).disjoint_union(&Graph::new(2));
        let back = parse_edge_list(&format_graph(&g)).unwrap().graph;
        assert_eq!(back, g);
    }
}
