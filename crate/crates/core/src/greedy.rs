//! Approximation algorithms for (k,1)-anonymization.
//!
//! `weak_any` and `strong_any` add one residual-reducing edge at a time
//! without looking for a good one. `weak_greedy` and `strong_greedy` pick the
//! best candidate each round: a triangle in the weak case, since two new edges
//! can help a vertex that neither helps alone, and a single edge in the
//! strong case.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::check::{strong_sharers, AnonParams, Mode};
use crate::error::{Error, Result};
use crate::graph::{normalize, Edge, Graph, Vertex};
use crate::plan::{EdgePlan, TraceStep};
use crate::tracker::Tracker;

/// The `k + 1` vertices of highest degree, ties to the lower index.
pub fn clique_site(g: &Graph, k: usize) -> Vec<Vertex> {
    let mut order: Vec<Vertex> = g.vertices().collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    order.truncate(k + 1);
    order.sort_unstable();
    order
}

fn missing_edges(g: &Graph, site: &[Vertex]) -> Vec<Edge> {
    let mut out = Vec::new();
    for (i, &a) in site.iter().enumerate() {
        for &b in &site[i + 1..] {
            if !g.has_edge(a, b) {
                out.push(normalize(a, b));
            }
        }
    }
    out
}

/// Most sharers `v` can reach in any strong transformation: a vertex outside
/// `N(v)` can be joined to all of it, one inside only to the rest of it.
pub fn strong_capacity(g: &Graph, v: Vertex, ell: usize) -> usize {
    let deg = g.degree(v);
    let outside = g.vertex_count() - 1 - deg;
    match deg {
        d if d > ell => outside + d,
        d if d == ell => outside,
        _ => 0,
    }
}

/// Errors unless some strong (k,ℓ)-transformation of `g` exists.
pub fn strong_feasible(g: &Graph, p: AnonParams) -> Result<()> {
    if p.ell == 1 {
        if let Some(v) = g.vertices().find(|&v| g.degree(v) == 0) {
            return Err(Error::IsolatedVertex(v));
        }
    }
    let low: Vec<Vertex> = g.vertices().filter(|&v| g.degree(v) < p.ell).collect();
    if !low.is_empty() {
        return Err(Error::DegreeTooLow {
            ell: p.ell,
            vertices: low,
        });
    }
    match g.vertices().find(|&v| strong_capacity(g, v, p.ell) < p.k) {
        Some(v) => Err(Error::TooSmall(format!(
            "vertex {v} can have at most {} strong sharers, {} needed",
            strong_capacity(g, v, p.ell),
            p.k
        ))),
        None => Ok(()),
    }
}

/// Weak (k,1)-anonymity is reachable exactly when `K_n` has it.
fn weak_size_check(g: &Graph, k: usize) -> Result<()> {
    let need = (k + 1).max(3);
    if g.vertex_count() < need {
        return Err(Error::TooSmall(format!("need at least {need} vertices")));
    }
    Ok(())
}

/// Collects iterations and turns them into a plan.
struct Run<'a> {
    g: &'a Graph,
    p: AnonParams,
    mode: Mode,
    tracker: Tracker<'a>,
    added: Vec<Edge>,
    trace: Vec<TraceStep>,
    /// Clique edges already in the tracker, booked with the next step.
    pending: Vec<Edge>,
    pending_before: usize,
}

impl<'a> Run<'a> {
    fn new(g: &'a Graph, p: AnonParams, mode: Mode) -> Self {
        Run {
            g,
            p,
            mode,
            tracker: Tracker::new(g, p, mode),
            added: Vec::new(),
            trace: Vec::new(),
            pending: Vec::new(),
            pending_before: 0,
        }
    }

    /// Adds edges that may not reduce the residual by themselves.
    fn preload(&mut self, edges: &[Edge]) {
        if self.pending.is_empty() {
            self.pending_before = self.tracker.total();
        }
        let fresh = self.tracker.apply(edges);
        self.pending.extend(fresh);
    }

    fn step(&mut self, edges: &[Edge]) {
        let mut before = self.tracker.total();
        let fresh = self.tracker.apply(edges);
        let mut booked = std::mem::take(&mut self.pending);
        if !booked.is_empty() {
            before = self.pending_before;
        }
        booked.extend(fresh);
        debug_assert!(self.tracker.total() < before);
        self.trace.push(TraceStep {
            edges: booked.clone(),
            residual_before: before,
            residual_after: self.tracker.total(),
        });
        self.added.extend(booked);
    }

    /// Best residual-reducing non-edge touching `around`, lowest pair on ties.
    fn best_edge_near(&mut self, around: &[Vertex]) -> Option<Edge> {
        let n = self.g.vertex_count();
        let mut best: Option<(usize, Edge)> = None;
        for &a in around {
            for b in 0..n {
                if a == b || self.tracker.graph().has_edge(a, b) {
                    continue;
                }
                let e = normalize(a, b);
                let gain = self.tracker.gain(&[e]);
                if gain > 0 && best.is_none_or(|(bg, be)| gain > bg || (gain == bg && e < be)) {
                    best = Some((gain, e));
                }
            }
        }
        best.map(|(_, e)| e)
    }

    fn finish(mut self) -> EdgePlan {
        if !self.pending.is_empty() {
            self.step(&[]);
        }
        let mut plan = EdgePlan::build(self.g, self.added, self.p, self.mode);
        plan.trace = self.trace;
        plan
    }
}

/// Adds, while some vertex is deficient, one edge from a neighbor of a
/// deficient vertex `u` to a vertex outside the 2-neighborhood of `u`. Once
/// only isolated vertices are deficient they are attached to a (k+1)-clique,
/// built on first use from the highest-degree vertices.
pub fn weak_any(g: &Graph, k: usize, seed: u64) -> Result<EdgePlan> {
    let p = AnonParams::new(k, 1)?;
    weak_size_check(g, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut run = Run::new(g, p, Mode::Weak);
    let mut site: Option<Vec<Vertex>> = None;
    while run.tracker.total() > 0 {
        let cur = run.tracker.graph();
        let deficient: Vec<Vertex> = run.tracker.deficient().collect();
        let edges = match deficient.iter().find(|&&u| cur.degree(u) > 0) {
            Some(&u) => {
                let mut options = Vec::new();
                let two = cur.two_neighborhood(u);
                for &w in cur.neighbors(u) {
                    for x in cur.vertices() {
                        if x != u && x != w && !two.contains(&x) && !cur.has_edge(w, x) {
                            options.push(normalize(w, x));
                        }
                    }
                }
                match options.choose(&mut rng) {
                    Some(&e) => vec![e],
                    // Only when n = k + 1 and u is a leaf whose neighbor is
                    // its last missing sharer.
                    None => vec![run.best_edge_near(&[u]).ok_or(Error::Stuck(run.tracker.total()))?],
                }
            }
            None => {
                if site.is_none() {
                    let s = clique_site(cur, k);
                    let missing = missing_edges(cur, &s);
                    site = Some(s);
                    run.preload(&missing);
                    // The clique may have settled some of the deficient vertices.
                    continue;
                }
                let s = site.as_deref().unwrap_or_default();
                let cur = run.tracker.graph();
                let u = deficient
                    .iter()
                    .copied()
                    .find(|u| cur.degree(*u) == 0)
                    .expect("isolated");
                vec![normalize(u, s[0])]
            }
        };
        run.step(&edges);
    }
    Ok(run.finish())
}

/// Strong counterpart of [`weak_any`]: joins an original neighbor of a
/// deficient vertex `u` to a vertex that does not yet strongly share with `u`.
pub fn strong_any(g: &Graph, k: usize, seed: u64) -> Result<EdgePlan> {
    let p = AnonParams::new(k, 1)?;
    strong_feasible(g, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut run = Run::new(g, p, Mode::Strong);
    while run.tracker.total() > 0 {
        let u = run.tracker.deficient().next().expect("positive residual");
        let cur = run.tracker.graph();
        let shared = strong_sharers(g, cur, u, 1);
        let mut options = Vec::new();
        for &w in g.neighbors(u) {
            for x in cur.vertices() {
                if x != u && x != w && !shared.contains(&x) && !cur.has_edge(w, x) {
                    options.push(normalize(w, x));
                }
            }
        }
        let &e = options.choose(&mut rng).ok_or(Error::Stuck(run.tracker.total()))?;
        run.step(&[e]);
    }
    Ok(run.finish())
}

/// Builds a (k+1)-clique on the highest-degree vertices, then repeatedly adds
/// the triangle that reduces residual anonymity the most, counting only its
/// missing edges. Ties go to fewer new edges, then to the lowest triple.
///
/// Triangles are drawn with one corner in the clique and the other two among
/// the clique, the deficient vertices and their neighbors.
///
/// `seed` is accepted for symmetry with the other anonymizers; the result
/// does not depend on it.
pub fn weak_greedy(g: &Graph, k: usize, seed: u64) -> Result<EdgePlan> {
    let _ = seed;
    let p = AnonParams::new(k, 1)?;
    let n = g.vertex_count();
    weak_size_check(g, k)?;
    let mut run = Run::new(g, p, Mode::Weak);
    if run.tracker.total() == 0 {
        return Ok(run.finish());
    }
    let site = clique_site(g, k);
    let mut in_site = vec![false; n];
    for &c in &site {
        in_site[c] = true;
    }
    run.preload(&missing_edges(g, &site));
    while run.tracker.total() > 0 {
        let cur = run.tracker.graph();
        let mut pool = vec![false; n];
        for v in run.tracker.deficient() {
            pool[v] = true;
            for &w in cur.neighbors(v) {
                pool[w] = true;
            }
        }
        let members: Vec<Vertex> = (0..n).filter(|&v| pool[v] || in_site[v]).collect();
        let mut best: Option<(usize, usize, [Vertex; 3])> = None;
        for &c in &site {
            for (i, &a) in members.iter().enumerate() {
                if a == c {
                    continue;
                }
                for &b in &members[i + 1..] {
                    if b == c {
                        continue;
                    }
                    let mut t = [a, b, c];
                    t.sort_unstable();
                    // Count each triangle once, from its lowest clique corner.
                    if t.iter().find(|&&x| in_site[x]) != Some(&c) {
                        continue;
                    }
                    let edges = [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])];
                    let new = edges
                        .iter()
                        .filter(|&&(x, y)| !run.tracker.graph().has_edge(x, y))
                        .count();
                    if new == 0 {
                        continue;
                    }
                    let gain = run.tracker.gain(&edges);
                    if gain == 0 {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((bg, bn, bt)) => {
                            (gain, std::cmp::Reverse(new), std::cmp::Reverse(t))
                                > (bg, std::cmp::Reverse(bn), std::cmp::Reverse(bt))
                        }
                    };
                    if better {
                        best = Some((gain, new, t));
                    }
                }
            }
        }
        let (_, _, t) = best.ok_or(Error::Stuck(run.tracker.total()))?;
        run.step(&[(t[0], t[1]), (t[0], t[2]), (t[1], t[2])]);
    }
    Ok(run.finish())
}

/// Repeatedly adds the non-edge that reduces strong residual anonymity the
/// most, lowest pair on ties.
pub fn strong_greedy(g: &Graph, k: usize) -> Result<EdgePlan> {
    let p = AnonParams::new(k, 1)?;
    strong_feasible(g, p)?;
    let n = g.vertex_count();
    let mut run = Run::new(g, p, Mode::Strong);
    while run.tracker.total() > 0 {
        // An edge only helps vertices next to one of its ends in `g`.
        let mut near = vec![false; n];
        for v in run.tracker.deficient() {
            for &w in g.neighbors(v) {
                near[w] = true;
            }
        }
        let around: Vec<Vertex> = (0..n).filter(|&v| near[v]).collect();
        let e = run.best_edge_near(&around).ok_or(Error::Stuck(run.tracker.total()))?;
        run.step(&[e]);
    }
    Ok(run.finish())
}
