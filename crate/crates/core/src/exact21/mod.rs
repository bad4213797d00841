//! Exact weak and strong (2,1)-anonymization.
//!
//! Both algorithms run in two phases. A local scan assigns *deficits* to
//! vertices: a deficit at `a` means one added edge must end at `a`, either to
//! give `a` new sharers or to give its neighbors one. The matching phase then
//! pairs deficit endpoints with new edges, and whatever cannot be paired is
//! satisfied by one edge each.
//!
//! In the weak setting an added edge `ab` makes `b` a sharer of every
//! neighbor of `a` and makes `N(b)` sharers of `a` itself. In the strong
//! setting only the original neighbors of `a` benefit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::check::{residual, strong_residual, AnonParams, Mode, ShareCounter};
use crate::error::{Error, Result};
use crate::graph::{normalize, Edge, Graph, Vertex};

mod profile;
mod strong;
mod weak;

pub use strong::anonymize_strong_21;
pub use weak::anonymize_weak_21;

const P21: AnonParams = AnonParams { k: 2, ell: 1 };

/// The scan rule that placed a deficit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    IsolatedEdge,
    IsolatedPath3,
    IsolatedPath4,
    PathWithAttachment,
    IsolatedStar,
    IsolatedSquare,
    SquareWithOutEdges,
    MultiSquare,
    LeafFan,
    PathPrefix,
    /// A deficient vertex no structural rule covered.
    Fallback,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::IsolatedEdge => "isolated_edge",
            Rule::IsolatedPath3 => "isolated_path3",
            Rule::IsolatedPath4 => "isolated_path4",
            Rule::PathWithAttachment => "path_with_attachment",
            Rule::IsolatedStar => "isolated_star",
            Rule::IsolatedSquare => "isolated_square",
            Rule::SquareWithOutEdges => "square_with_out_edges",
            Rule::MultiSquare => "multi_square",
            Rule::LeafFan => "leaf_fan",
            Rule::PathPrefix => "path_prefix",
            Rule::Fallback => "fallback",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DeficitAssignment {
    /// Nonzero deficits only.
    pub deficits: BTreeMap<Vertex, u8>,
    pub rule_trace: BTreeMap<Vertex, Rule>,
    pub total: usize,
    /// Vertices the scan visited.
    pub visited: BTreeSet<Vertex>,
}

impl DeficitAssignment {
    pub fn deficit(&self, v: Vertex) -> u8 {
        self.deficits.get(&v).copied().unwrap_or(0)
    }

    fn place(&mut self, v: Vertex, amount: u8, rule: Rule) {
        let d = self.deficits.entry(v).or_insert(0);
        if *d < amount {
            self.total += usize::from(amount - *d);
            *d = amount;
            self.rule_trace.insert(v, rule);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrongMode {
    /// Maximum matching; minimum edge count.
    Exact,
    /// Seeded greedy matching; at most two edges above the minimum.
    Linear,
}

impl fmt::Display for StrongMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrongMode::Exact => "exact",
            StrongMode::Linear => "linear",
        })
    }
}

impl std::str::FromStr for StrongMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(StrongMode::Exact),
            "linear" => Ok(StrongMode::Linear),
            other => Err(Error::BadParams(format!("unknown strong mode {other:?}"))),
        }
    }
}

fn other_neighbor(g: &Graph, w: Vertex, from: Vertex) -> Vertex {
    let nb = g.neighbors(w);
    debug_assert_eq!(nb.len(), 2);
    if nb[0] == from {
        nb[1]
    } else {
        nb[0]
    }
}

/// Neighbors of a deficient non-leaf vertex, split into leaves and degree-2
/// vertices, plus the common far endpoint of the degree-2 ones.
struct Fan {
    leaves: Vec<Vertex>,
    twos: Vec<Vertex>,
    far: Option<Vertex>,
}

fn fan(g: &Graph, v: Vertex) -> Option<Fan> {
    let mut leaves = Vec::new();
    let mut twos = Vec::new();
    let mut far = None;
    for &w in g.neighbors(v) {
        match g.degree(w) {
            1 => leaves.push(w),
            2 => {
                let x = other_neighbor(g, w, v);
                if far.is_some_and(|f| f != x) || g.has_edge(v, x) {
                    return None;
                }
                far = Some(x);
                twos.push(w);
            }
            _ => return None,
        }
    }
    Some(Fan { leaves, twos, far })
}

/// Corners of the isolated square containing `v`, as (lowest corner, its opposite).
fn square_opposite(g: &Graph, v: Vertex, twos: &[Vertex], x: Vertex) -> (Vertex, Vertex) {
    let low = [v, x, twos[0], twos[1]].into_iter().min().expect("four corners");
    if low == v || low == x {
        (v.min(x), v.max(x))
    } else {
        let _ = g;
        (twos[0].min(twos[1]), twos[0].max(twos[1]))
    }
}

type Placements = Vec<(Vertex, u8, Rule)>;

fn weak_rule(g: &Graph, v: Vertex) -> Option<Placements> {
    if g.degree(v) == 1 {
        let w = g.neighbors(v)[0];
        match g.degree(w) {
            1 => return Some(vec![(v, 1, Rule::IsolatedEdge), (w, 1, Rule::IsolatedEdge)]),
            2 => {}
            _ => return None,
        }
        let w2 = other_neighbor(g, w, v);
        return Some(match g.degree(w2) {
            1 => vec![(w, 1, Rule::IsolatedPath3)],
            2 => {
                let w3 = other_neighbor(g, w2, w);
                if g.degree(w3) == 1 {
                    vec![(w, 1, Rule::IsolatedPath4), (w2, 1, Rule::IsolatedPath4)]
                } else {
                    vec![(w, 1, Rule::PathWithAttachment)]
                }
            }
            _ => vec![(w, 1, Rule::PathWithAttachment)],
        });
    }
    let f = fan(g, v)?;
    let Some(x) = f.far else {
        let rule = if f.leaves.len() == 2 {
            Rule::IsolatedPath3
        } else {
            Rule::IsolatedStar
        };
        return Some(vec![(v, 1, rule)]);
    };
    if f.twos.len() == 1 {
        let a = f.twos[0];
        return match f.leaves.len() {
            0 => None,
            1 if g.degree(x) == 1 => Some(vec![(v, 1, Rule::IsolatedPath4), (a, 1, Rule::IsolatedPath4)]),
            1 => Some(vec![(v, 1, Rule::PathWithAttachment)]),
            _ => Some(vec![(a, 1, Rule::LeafFan)]),
        };
    }
    let low = *f.twos.iter().min().expect("nonempty");
    if f.leaves.is_empty() && f.twos.len() == 2 && g.degree(x) == 2 {
        let (a, b) = square_opposite(g, v, &f.twos, x);
        Some(vec![(a, 1, Rule::IsolatedSquare), (b, 1, Rule::IsolatedSquare)])
    } else if f.leaves.is_empty() && f.twos.len() == 2 {
        Some(vec![(low, 1, Rule::SquareWithOutEdges)])
    } else {
        Some(vec![(low, 1, Rule::MultiSquare)])
    }
}

fn strong_rule(g: &Graph, v: Vertex) -> Option<Placements> {
    if g.degree(v) == 1 {
        let w = g.neighbors(v)[0];
        match g.degree(w) {
            1 => return Some(vec![(v, 2, Rule::IsolatedEdge), (w, 2, Rule::IsolatedEdge)]),
            2 => {}
            _ => return None,
        }
        let w2 = other_neighbor(g, w, v);
        return Some(match g.degree(w2) {
            1 => vec![
                (v, 1, Rule::IsolatedPath3),
                (w, 1, Rule::IsolatedPath3),
                (w2, 1, Rule::IsolatedPath3),
            ],
            2 => {
                let w3 = other_neighbor(g, w2, w);
                let rule = if g.degree(w3) == 1 {
                    Rule::IsolatedPath4
                } else {
                    Rule::PathPrefix
                };
                vec![(w, 1, rule), (w2, 1, rule)]
            }
            _ => vec![(w, 1, Rule::PathPrefix)],
        });
    }
    let f = fan(g, v)?;
    let Some(x) = f.far else {
        if f.leaves.len() == 2 {
            let mut out = vec![(v, 1, Rule::IsolatedPath3)];
            out.extend(f.leaves.iter().map(|&l| (l, 1, Rule::IsolatedPath3)));
            return Some(out);
        }
        return Some(vec![
            (f.leaves[0], 1, Rule::IsolatedStar),
            (f.leaves[1], 1, Rule::IsolatedStar),
        ]);
    };
    if f.twos.len() == 1 {
        let a = f.twos[0];
        return match f.leaves.len() {
            0 => None,
            1 => {
                let rule = if g.degree(x) == 1 {
                    Rule::IsolatedPath4
                } else {
                    Rule::PathPrefix
                };
                Some(vec![(v, 1, rule), (a, 1, rule)])
            }
            _ => Some(vec![(a, 1, Rule::LeafFan)]),
        };
    }
    let low = *f.twos.iter().min().expect("nonempty");
    if f.leaves.is_empty() && f.twos.len() == 2 && g.degree(x) == 2 {
        let u = [v, x, f.twos[0], f.twos[1]].into_iter().min().expect("four corners");
        let next = g.neighbors(u)[0];
        Some(vec![(u, 1, Rule::IsolatedSquare), (next, 1, Rule::IsolatedSquare)])
    } else if f.leaves.is_empty() && f.twos.len() == 2 {
        Some(vec![(low, 1, Rule::SquareWithOutEdges)])
    } else {
        Some(vec![(low, 1, Rule::MultiSquare)])
    }
}

/// Whether the deficits placed so far account for deficient vertex `y`.
fn is_covered(g: &Graph, a: &DeficitAssignment, r: &[usize], y: Vertex, mode: Mode) -> bool {
    let around: usize = g.neighbors(y).iter().map(|&w| usize::from(a.deficit(w))).sum();
    match mode {
        Mode::Weak => a.deficit(y) > 0 || around >= r[y],
        Mode::Strong => around >= r[y],
    }
}

fn ball(g: &Graph, s: Vertex, radius: usize) -> Vec<Vertex> {
    let mut dist = BTreeMap::new();
    dist.insert(s, 0usize);
    let mut frontier = vec![s];
    for d in 1..=radius {
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in g.neighbors(v) {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(w) {
                    e.insert(d);
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    dist.into_keys().collect()
}

fn scan(g: &Graph, order: &[Vertex], mode: Mode) -> DeficitAssignment {
    let n = g.vertex_count();
    let r = residual(g, P21).residual;
    let rule = match mode {
        Mode::Weak => weak_rule,
        Mode::Strong => strong_rule,
    };
    let mut out = DeficitAssignment::default();
    let mut marked = vec![false; n];
    let handle = |out: &mut DeficitAssignment, v: Vertex| {
        if r[v] == 0 || g.degree(v) == 0 || is_covered(g, out, &r, v, mode) {
            return;
        }
        if let Some(placements) = rule(g, v) {
            for (u, amount, rl) in placements {
                out.place(u, amount, rl);
            }
        }
    };
    for &s in order {
        if marked[s] || !matches!(g.degree(s), 1 | 2) {
            continue;
        }
        let seen = ball(g, s, 4);
        for &v in &seen {
            marked[v] = true;
            out.visited.insert(v);
        }
        for &v in &seen {
            handle(&mut out, v);
        }
    }
    // Deficient vertices at distance 5 from every start are reached here.
    for &v in order {
        if r[v] > 0 && g.degree(v) > 0 && !is_covered(g, &out, &r, v, mode) {
            out.visited.insert(v);
            handle(&mut out, v);
        }
    }
    for &v in order {
        while r[v] > 0 && g.degree(v) > 0 && !is_covered(g, &out, &r, v, mode) {
            let target = match mode {
                Mode::Weak => v,
                Mode::Strong => *g
                    .neighbors(v)
                    .iter()
                    .find(|&&w| out.deficit(w) < 2)
                    .expect("a neighbor below deficit 2"),
            };
            let amount = out.deficit(target) + 1;
            out.visited.insert(target);
            out.place(target, amount, Rule::Fallback);
        }
    }
    out
}

pub fn assign_deficits_weak(g: &Graph) -> DeficitAssignment {
    let order: Vec<Vertex> = g.vertices().collect();
    scan(g, &order, Mode::Weak)
}

/// As [`assign_deficits_weak`], scanning start vertices in the given order.
pub fn assign_deficits_weak_with_order(g: &Graph, order: &[Vertex]) -> DeficitAssignment {
    scan(g, order, Mode::Weak)
}

pub fn assign_deficits_strong(g: &Graph) -> Result<DeficitAssignment> {
    let order: Vec<Vertex> = g.vertices().collect();
    assign_deficits_strong_with_order(g, &order)
}

pub fn assign_deficits_strong_with_order(g: &Graph, order: &[Vertex]) -> Result<DeficitAssignment> {
    if let Some(v) = g.vertices().find(|&v| g.degree(v) == 0) {
        return Err(Error::IsolatedVertex(v));
    }
    Ok(scan(g, order, Mode::Strong))
}

fn sharers_ok(counter: &mut ShareCounter, work: &Graph, y: Vertex) -> bool {
    counter.count(work, work, y, 1) >= 2
}

fn strong_ok(counter: &mut ShareCounter, g: &Graph, work: &Graph, y: Vertex) -> bool {
    counter.count(g, work, y, 1) >= 2
}

/// Shared state for building an edge set on top of the input graph.
struct Builder<'a> {
    g: &'a Graph,
    work: Graph,
    added: Vec<Edge>,
    counter: ShareCounter,
    comp: Vec<usize>,
}

impl<'a> Builder<'a> {
    fn new(g: &'a Graph) -> Self {
        Builder {
            g,
            work: g.clone(),
            added: Vec::new(),
            counter: ShareCounter::new(g.vertex_count()),
            comp: g.component_ids(),
        }
    }

    fn add(&mut self, u: Vertex, v: Vertex) {
        debug_assert!(u != v && !self.work.has_edge(u, v), "bad edge {u}-{v}");
        self.work.insert_unchecked(u, v);
        self.added.push(normalize(u, v));
    }

    fn can_add(&self, u: Vertex, v: Vertex) -> bool {
        u != v && !self.work.has_edge(u, v)
    }

    fn ok(&mut self, y: Vertex, mode: Mode) -> bool {
        match mode {
            Mode::Weak => sharers_ok(&mut self.counter, &self.work, y),
            Mode::Strong => strong_ok(&mut self.counter, self.g, &self.work, y),
        }
    }

    /// Whether adding `u v` would leave every vertex of `need` satisfied.
    fn trial(&mut self, u: Vertex, v: Vertex, need: &[Vertex], mode: Mode) -> bool {
        if !self.can_add(u, v) {
            return false;
        }
        self.work.insert_unchecked(u, v);
        let good = need.iter().all(|&y| self.ok(y, mode));
        self.work.remove_unchecked(u, v);
        good
    }

    /// Candidate partners for an edge at `x`: vertices of degree at least 2
    /// outside `x`'s component first, then the rest, by index.
    fn partner_order(&self, x: Vertex) -> Vec<Vertex> {
        let mut cands: Vec<Vertex> = self.work.vertices().filter(|&p| self.can_add(x, p)).collect();
        cands.sort_by_key(|&p| (self.work.degree(p) < 2, self.comp[p] == self.comp[x], p));
        cands
    }

    /// Adds one edge that satisfies every vertex of `need`, preferring edges at
    /// the vertices of `at`, then any edge touching their neighborhoods.
    fn anchor(&mut self, at: &[Vertex], need: &[Vertex], mode: Mode) -> bool {
        let need: Vec<Vertex> = need.iter().copied().filter(|&y| !self.ok(y, mode)).collect();
        if need.is_empty() {
            return true;
        }
        for &x in at {
            for p in self.partner_order(x) {
                if self.trial(x, p, &need, mode) {
                    self.add(x, p);
                    return true;
                }
            }
        }
        let mut near: BTreeSet<Vertex> = BTreeSet::new();
        for &x in at {
            near.insert(x);
            near.extend(self.work.neighbors(x).iter().copied());
        }
        for &y in &near {
            for p in self.partner_order(y) {
                if self.trial(y, p, &need, mode) {
                    self.add(y, p);
                    return true;
                }
            }
        }
        false
    }

    fn residual(&self, mode: Mode) -> usize {
        match mode {
            Mode::Weak => residual(&self.work, P21).total,
            Mode::Strong => strong_residual(self.g, &self.work, P21).expect("superset").total,
        }
    }

    /// Last-resort completion: repeatedly add the edge near the first deficient
    /// vertex that lowers the residual most.
    fn repair(&mut self, mode: Mode) {
        loop {
            let report = match mode {
                Mode::Weak => residual(&self.work, P21),
                Mode::Strong => strong_residual(self.g, &self.work, P21).expect("superset"),
            };
            let Some(&y) = report.deficient.first() else {
                return;
            };
            let mut touch: BTreeSet<Vertex> = self.g.neighbors(y).iter().copied().collect();
            if mode == Mode::Weak {
                touch.insert(y);
                touch.extend(self.work.neighbors(y).iter().copied());
            }
            let mut best: Option<(usize, Edge)> = None;
            for &a in &touch {
                for b in self.work.vertices() {
                    if !self.can_add(a, b) {
                        continue;
                    }
                    self.work.insert_unchecked(a, b);
                    let r = self.residual(mode);
                    self.work.remove_unchecked(a, b);
                    let e = normalize(a, b);
                    if best.is_none_or(|(br, be)| (r, e) < (br, be)) {
                        best = Some((r, e));
                    }
                }
            }
            let (_, (a, b)) = best.expect("feasible instance has a candidate edge");
            self.add(a, b);
        }
    }
}
