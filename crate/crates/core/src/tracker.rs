//! Incremental residual bookkeeping for the greedy anonymizers.

use crate::check::{AnonParams, Mode, ShareCounter};
use crate::graph::{Edge, Graph, Vertex};

/// Sharer counts of a growing graph, kept current as edges are added.
///
/// In strong mode sharing is measured from the original neighborhoods of
/// `base` into the current graph.
pub(crate) struct Tracker<'a> {
    base: &'a Graph,
    cur: Graph,
    p: AnonParams,
    mode: Mode,
    count: Vec<usize>,
    total: usize,
    counter: ShareCounter,
    mark: Vec<u32>,
    stamp: u32,
}

impl<'a> Tracker<'a> {
    pub(crate) fn new(base: &'a Graph, p: AnonParams, mode: Mode) -> Self {
        let n = base.vertex_count();
        let mut t = Tracker {
            base,
            cur: base.clone(),
            p,
            mode,
            count: vec![0; n],
            total: 0,
            counter: ShareCounter::new(n),
            mark: vec![0; n],
            stamp: 0,
        };
        for v in base.vertices() {
            t.count[v] = t.measure(v);
            t.total += t.residual(v);
        }
        t
    }

    pub(crate) fn graph(&self) -> &Graph {
        &self.cur
    }

    pub(crate) fn total(&self) -> usize {
        self.total
    }

    pub(crate) fn residual(&self, v: Vertex) -> usize {
        self.p.k.saturating_sub(self.count[v])
    }

    pub(crate) fn deficient(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.cur.vertices().filter(|&v| self.residual(v) > 0)
    }

    fn measure(&mut self, v: Vertex) -> usize {
        let base = match self.mode {
            Mode::Weak => &self.cur,
            Mode::Strong => self.base,
        };
        self.counter.count(base, &self.cur, v, self.p.ell)
    }

    /// Vertices whose sharer count may differ after `edges` are present in
    /// the current graph.
    fn affected(&mut self, edges: &[Edge]) -> Vec<Vertex> {
        self.stamp += 1;
        let look = match self.mode {
            Mode::Weak => &self.cur,
            Mode::Strong => self.base,
        };
        let mut out = Vec::new();
        for &(a, b) in edges {
            let ends: &[Vertex] = match self.mode {
                Mode::Weak => &[a, b],
                Mode::Strong => &[],
            };
            for &x in ends.iter().chain(look.neighbors(a)).chain(look.neighbors(b)) {
                if self.mark[x] != self.stamp {
                    self.mark[x] = self.stamp;
                    out.push(x);
                }
            }
        }
        out
    }

    /// Residual reduction that adding the non-edges `edges` would bring.
    /// Edges already present are ignored.
    pub(crate) fn gain(&mut self, edges: &[Edge]) -> usize {
        let fresh: Vec<Edge> = edges
            .iter()
            .copied()
            .filter(|&(a, b)| !self.cur.has_edge(a, b))
            .collect();
        if fresh.is_empty() {
            return 0;
        }
        for &(a, b) in &fresh {
            self.cur.insert_unchecked(a, b);
        }
        let touched = self.affected(&fresh);
        let mut gain = 0;
        for &v in &touched {
            let before = self.residual(v);
            if before > 0 {
                let now = self.measure(v);
                gain += before - self.p.k.saturating_sub(now).min(before);
            }
        }
        for &(a, b) in &fresh {
            self.cur.remove_unchecked(a, b);
        }
        gain
    }

    /// Adds the missing edges among `edges` and returns them.
    pub(crate) fn apply(&mut self, edges: &[Edge]) -> Vec<Edge> {
        let fresh: Vec<Edge> = edges
            .iter()
            .copied()
            .filter(|&(a, b)| !self.cur.has_edge(a, b))
            .collect();
        for &(a, b) in &fresh {
            self.cur.insert_unchecked(a, b);
        }
        for v in self.affected(&fresh) {
            let before = self.residual(v);
            self.count[v] = self.measure(v);
            self.total = self.total - before + self.residual(v);
        }
        fresh
    }
}
