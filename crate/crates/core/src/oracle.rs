//! Exhaustive minimum-edge-addition solvers for small instances.
//!
//! Two search strategies share one contract:
//!
//! * [`Search::Full`] enumerates added-edge subsets of the non-edges by
//!   increasing size, lexicographically within each size.
//! * [`Search::Branching`] runs iterative deepening where each node branches
//!   on the non-edges that can change the sharer set of the lowest-index
//!   deficient vertex (edges touching its closed neighborhood in the weak
//!   setting, its original neighborhood in the strong setting). Every
//!   solution must contain such an edge, so the search is complete. Earlier
//!   siblings are forbidden in later subtrees so each subset is visited once.
//!
//! Both return the same minimum; the branching search is what makes
//! 12-vertex corpora tractable.

use crate::check::{is_kl_anonymous, is_strong_transformation, residual, strong_residual, AnonParams, Mode};
use crate::error::{Error, Result};
use crate::graph::{normalize, Edge, Graph, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Minimum {
    Value(usize),
    /// No number of added edges can reach the target (the complete graph fails it).
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub minimum: Minimum,
    /// One optimal added-edge set, sorted. Empty when infeasible.
    pub witness: Vec<Edge>,
    /// Number of candidate sets (full) or search nodes (branching) examined.
    pub explored: u64,
}

impl OracleResult {
    pub fn value(&self) -> Option<usize> {
        match self.minimum {
            Minimum::Value(v) => Some(v),
            Minimum::Infeasible => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Search {
    Full,
    Branching,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    /// Largest added-edge count to try; `None` means every non-edge.
    pub max_budget: Option<usize>,
    pub search: Search,
    /// Only branch to the lowest-index interchangeable isolated vertex.
    pub symmetry: bool,
    /// Abort with `BudgetExceeded` after this many explored nodes.
    pub node_limit: Option<u64>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            max_budget: None,
            search: Search::Branching,
            symmetry: true,
            node_limit: None,
        }
    }
}

impl OracleOptions {
    pub fn with_budget(max_budget: usize) -> Self {
        OracleOptions {
            max_budget: Some(max_budget),
            ..Default::default()
        }
    }
}

pub fn oracle_weak(g: &Graph, k: usize, ell: usize, opts: OracleOptions) -> Result<OracleResult> {
    solve(g, AnonParams::new(k, ell)?, Mode::Weak, opts)
}

pub fn oracle_strong(g: &Graph, k: usize, ell: usize, opts: OracleOptions) -> Result<OracleResult> {
    solve(g, AnonParams::new(k, ell)?, Mode::Strong, opts)
}

pub fn solve(g: &Graph, p: AnonParams, mode: Mode, opts: OracleOptions) -> Result<OracleResult> {
    let complete = Graph::complete(g.vertex_count());
    if !passes(g, &complete, p, mode) {
        return Ok(OracleResult {
            minimum: Minimum::Infeasible,
            witness: Vec::new(),
            explored: 0,
        });
    }
    let non_edges = complete.edge_count() - g.edge_count();
    let budget = opts.max_budget.unwrap_or(non_edges).min(non_edges);
    match opts.search {
        Search::Full => full_search(g, p, mode, budget, opts.node_limit),
        Search::Branching => branching_search(g, p, mode, budget, opts),
    }
}

fn passes(g: &Graph, current: &Graph, p: AnonParams, mode: Mode) -> bool {
    match mode {
        Mode::Weak => is_kl_anonymous(current, p),
        Mode::Strong => is_strong_transformation(g, current, p).unwrap_or(false),
    }
}

fn full_search(g: &Graph, p: AnonParams, mode: Mode, budget: usize, limit: Option<u64>) -> Result<OracleResult> {
    let candidates: Vec<Edge> = Graph::complete(g.vertex_count())
        .edges()
        .filter(|&(u, v)| !g.has_edge(u, v))
        .collect();
    let mut explored = 0u64;
    let mut work = g.clone();
    for size in 0..=budget {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            explored += 1;
            if limit.is_some_and(|l| explored > l) {
                return Err(Error::BudgetExceeded { explored });
            }
            for &i in &idx {
                work.insert_unchecked(candidates[i].0, candidates[i].1);
            }
            let ok = passes(g, &work, p, mode);
            for &i in &idx {
                work.remove_unchecked(candidates[i].0, candidates[i].1);
            }
            if ok {
                return Ok(OracleResult {
                    minimum: Minimum::Value(size),
                    witness: idx.iter().map(|&i| candidates[i]).collect(),
                    explored,
                });
            }
            if !next_combination(&mut idx, candidates.len()) {
                break;
            }
        }
    }
    Err(Error::BudgetExceeded { explored })
}

/// Advances `idx` to the next k-combination of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

struct Brancher<'a> {
    original: &'a Graph,
    p: AnonParams,
    mode: Mode,
    symmetry: bool,
    limit: Option<u64>,
    explored: u64,
    forbidden: Vec<Vec<bool>>,
    chosen: Vec<Edge>,
}

impl Brancher<'_> {
    fn report(&self, current: &Graph) -> crate::check::ResidualReport {
        match self.mode {
            Mode::Weak => residual(current, self.p),
            Mode::Strong => strong_residual(self.original, current, self.p).expect("superset by construction"),
        }
    }

    /// Upper bound on how much one added edge can lower the total residual.
    fn max_drop_per_edge(&self, current: &Graph, residual: &[usize], remaining: usize) -> usize {
        let deficient_nbrs = |g: &Graph, x: Vertex| g.neighbors(x).iter().filter(|&&y| residual[y] > 0).count();
        match self.mode {
            // Edge (a,b) only adds a or b as sharers, and only to original neighbors of b or a.
            Mode::Strong => {
                2 * current
                    .vertices()
                    .map(|x| deficient_nbrs(self.original, x))
                    .max()
                    .unwrap_or(0)
            }
            // New sharing pairs all contain a or b: a gains at most r(a), and each
            // deficient neighbor of a or b gains at most one sharer per endpoint.
            Mode::Weak => {
                let best = current
                    .vertices()
                    .map(|x| residual[x] + deficient_nbrs(current, x))
                    .max()
                    .unwrap_or(0);
                2 * (best + remaining)
            }
        }
    }

    fn candidates(&self, current: &Graph, v: Vertex) -> Vec<Edge> {
        let n = current.vertex_count();
        let anchors: Vec<Vertex> = match self.mode {
            Mode::Weak => std::iter::once(v).chain(current.neighbors(v).iter().copied()).collect(),
            Mode::Strong => self.original.neighbors(v).to_vec(),
        };
        let untouched_isolated =
            |x: Vertex| current.degree(x) == 0 && self.original.degree(x) == 0 && !self.forbidden[x].iter().any(|&f| f);
        let mut out = Vec::new();
        for &a in &anchors {
            let mut used_isolated = false;
            for b in 0..n {
                if b == a || current.has_edge(a, b) || self.forbidden[a][b] {
                    continue;
                }
                if self.symmetry && untouched_isolated(b) && b != v {
                    if used_isolated {
                        continue;
                    }
                    used_isolated = true;
                }
                out.push(normalize(a, b));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn dfs(&mut self, current: &mut Graph, budget: usize) -> Result<bool> {
        self.explored += 1;
        if self.limit.is_some_and(|l| self.explored > l) {
            return Err(Error::BudgetExceeded {
                explored: self.explored,
            });
        }
        let report = self.report(current);
        if report.total == 0 {
            return Ok(true);
        }
        if budget == 0 {
            return Ok(false);
        }
        let drop = self.max_drop_per_edge(current, &report.residual, budget);
        if drop == 0 || report.total > drop * budget {
            return Ok(false);
        }
        let v = report.deficient[0];
        let cands = self.candidates(current, v);
        let mut banned = Vec::with_capacity(cands.len());
        let mut found = false;
        for &(a, b) in &cands {
            current.insert_unchecked(a, b);
            self.chosen.push((a, b));
            let ok = self.dfs(current, budget - 1);
            current.remove_unchecked(a, b);
            match ok {
                Ok(true) => {
                    found = true;
                    break;
                }
                Ok(false) => {
                    self.chosen.pop();
                    self.forbidden[a][b] = true;
                    self.forbidden[b][a] = true;
                    banned.push((a, b));
                }
                Err(e) => {
                    for &(x, y) in &banned {
                        self.forbidden[x][y] = false;
                        self.forbidden[y][x] = false;
                    }
                    return Err(e);
                }
            }
        }
        for &(x, y) in &banned {
            self.forbidden[x][y] = false;
            self.forbidden[y][x] = false;
        }
        Ok(found)
    }
}

fn branching_search(g: &Graph, p: AnonParams, mode: Mode, budget: usize, opts: OracleOptions) -> Result<OracleResult> {
    let n = g.vertex_count();
    let mut b = Brancher {
        original: g,
        p,
        mode,
        symmetry: opts.symmetry,
        limit: opts.node_limit,
        explored: 0,
        forbidden: vec![vec![false; n]; n],
        chosen: Vec::new(),
    };
    let mut current = g.clone();
    for size in 0..=budget {
        b.chosen.clear();
        if b.dfs(&mut current, size)? {
            let mut witness = b.chosen.clone();
            witness.sort_unstable();
            return Ok(OracleResult {
                minimum: Minimum::Value(size),
                witness,
                explored: b.explored,
            });
        }
    }
    Err(Error::BudgetExceeded { explored: b.explored })
}
