//! Simple undirected graphs over dense vertex ids `0..n`.
//!
//! Adjacency is kept as one sorted neighbor list per vertex, so membership is
//! a binary search and common-neighbor counts are a linear merge.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

pub type Vertex = usize;
pub type Edge = (Vertex, Vertex);
pub type VertexSet = BTreeSet<Vertex>;

/// Orders the endpoints of an undirected pair.
#[inline]
pub fn normalize(u: Vertex, v: Vertex) -> Edge {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Graph {
    adj: Vec<Vec<Vertex>>,
    edge_count: usize,
}

impl Graph {
    pub fn new(vertex_count: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); vertex_count],
            edge_count: 0,
        }
    }

    pub fn from_edges<I>(vertex_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = Edge>,
    {
        let mut g = Graph::new(vertex_count);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.insert_unchecked(u, v);
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Graph::new(n);
        for v in 1..n {
            g.insert_unchecked(v - 1, v);
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::path(n);
        if n >= 3 {
            g.insert_unchecked(0, n - 1);
        }
        g
    }

    /// Star with center 0 and leaves `1..=leaves`.
    pub fn star(leaves: usize) -> Self {
        let mut g = Graph::new(leaves + 1);
        for v in 1..=leaves {
            g.insert_unchecked(0, v);
        }
        g
    }

    /// Disjoint union; vertices of `other` are shifted by `self.vertex_count()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.vertex_count();
        let mut g = self.clone();
        g.adj
            .extend(other.adj.iter().map(|ns| ns.iter().map(|&w| w + shift).collect()));
        g.edge_count += other.edge_count;
        g
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    #[inline]
    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.adj.len() && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn vertices(&self) -> std::ops::Range<Vertex> {
        0..self.adj.len()
    }

    /// All edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: v,
                vertex_count: self.vertex_count(),
            })
        }
    }

    pub fn add_edge(&mut self, u: Vertex, v: Vertex) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if self.has_edge(u, v) {
            let (a, b) = normalize(u, v);
            return Err(Error::DuplicateEdge(a, b));
        }
        self.insert_unchecked(u, v);
        Ok(())
    }

    /// Value-semantic edge addition: returns a new graph, leaving `self` intact.
    pub fn with_edge(&self, u: Vertex, v: Vertex) -> Result<Graph> {
        let mut g = self.clone();
        g.add_edge(u, v)?;
        Ok(g)
    }

    pub(crate) fn insert_unchecked(&mut self, u: Vertex, v: Vertex) {
        if let Err(pos) = self.adj[u].binary_search(&v) {
            self.adj[u].insert(pos, v);
            let pos = self.adj[v].binary_search(&u).unwrap_err();
            self.adj[v].insert(pos, u);
            self.edge_count += 1;
        }
    }

    pub(crate) fn remove_unchecked(&mut self, u: Vertex, v: Vertex) {
        if let Ok(pos) = self.adj[u].binary_search(&v) {
            self.adj[u].remove(pos);
            let pos = self.adj[v].binary_search(&u).unwrap();
            self.adj[v].remove(pos);
            self.edge_count -= 1;
        }
    }

    /// `|N(u) ∩ N(v)|`.
    pub fn common_neighbor_count(&self, u: Vertex, v: Vertex) -> Result<usize> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::SameVertex(u));
        }
        Ok(sorted_intersection_len(&self.adj[u], &self.adj[v]))
    }

    /// Vertices reachable from `v` by a walk of length exactly two, excluding `v`.
    pub fn two_neighborhood(&self, v: Vertex) -> VertexSet {
        let mut out = VertexSet::new();
        for &w in &self.adj[v] {
            out.extend(self.adj[w].iter().copied().filter(|&u| u != v));
        }
        out
    }

    /// Pairs of `s` that are not edges, each reported once as `(min, max)`.
    pub fn non_edges_within(&self, s: &VertexSet) -> Vec<Edge> {
        let members: Vec<Vertex> = s.iter().copied().collect();
        let mut out = Vec::new();
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                if !self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<Vertex>> {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut stack = vec![s];
            let mut comp = Vec::new();
            while let Some(x) = stack.pop() {
                comp.push(x);
                for &y in &self.adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Component index per vertex, numbered in the order of [`Graph::components`].
    pub fn component_ids(&self) -> Vec<usize> {
        let mut ids = vec![0; self.vertex_count()];
        for (i, comp) in self.components().iter().enumerate() {
            for &v in comp {
                ids[v] = i;
            }
        }
        ids
    }

    /// True when every edge of `self` is also an edge of `other`.
    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.vertex_count() == other.vertex_count() && self.edges().all(|(u, v)| other.has_edge(u, v))
    }

    /// Relabels vertices: vertex `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[Vertex]) -> Graph {
        let mut g = Graph::new(self.vertex_count());
        for (u, v) in self.edges() {
            g.insert_unchecked(perm[u], perm[v]);
        }
        g
    }
}

pub(crate) fn sorted_intersection_len(a: &[Vertex], b: &[Vertex]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::complete(3)
    }

    #[test]
    fn add_edge_to_empty_graph() {
        let g = Graph::new(3).with_edge(0, 1).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn duplicate_and_self_loop_rejected() {
        assert_eq!(triangle().with_edge(0, 1), Err(Error::DuplicateEdge(0, 1)));
        assert_eq!(triangle().with_edge(1, 0), Err(Error::DuplicateEdge(0, 1)));
        assert_eq!(Graph::new(2).with_edge(1, 1), Err(Error::SelfLoop(1)));
        assert!(matches!(
            Graph::new(2).with_edge(0, 2),
            Err(Error::VertexOutOfRange { vertex: 2, .. })
        ));
    }

    #[test]
    fn closing_a_two_path_gives_triangle() {
        let g = Graph::path(3).with_edge(0, 2).unwrap();
        assert_eq!(g, triangle());
    }

    #[test]
    fn common_neighbors() {
        assert_eq!(triangle().common_neighbor_count(0, 1), Ok(1));
        let k5 = Graph::complete(5);
        for u in 0..5 {
            for v in 0..5 {
                if u != v {
                    assert_eq!(k5.common_neighbor_count(u, v), Ok(3));
                }
            }
        }
        let p = Graph::path(3);
        assert_eq!(p.common_neighbor_count(0, 2), Ok(1));
        assert_eq!(p.common_neighbor_count(0, 1), Ok(0));
        assert_eq!(p.common_neighbor_count(1, 1), Err(Error::SameVertex(1)));
    }

    #[test]
    fn two_neighborhoods() {
        assert_eq!(Graph::path(3).two_neighborhood(0), VertexSet::from([2]));
        assert_eq!(triangle().two_neighborhood(0), VertexSet::from([1, 2]));
        assert!(Graph::star(3).two_neighborhood(0).is_empty());
    }

    #[test]
    fn non_edges() {
        let all: VertexSet = (0..3).collect();
        assert!(triangle().non_edges_within(&all).is_empty());
        assert_eq!(Graph::new(3).non_edges_within(&all).len(), 3);
        let all4: VertexSet = (0..4).collect();
        assert_eq!(Graph::path(4).non_edges_within(&all4), vec![(0, 2), (0, 3), (1, 3)]);
    }

    #[test]
    fn components_and_union() {
        let g = Graph::path(3).disjoint_union(&Graph::new(2));
        assert_eq!(g.components(), vec![vec![0, 1, 2], vec![3], vec![4]]);
        assert_eq!(g.edge_count(), 2);
    }
}
