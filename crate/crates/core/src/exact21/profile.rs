//! Per-cluster profiles shared by the weak and strong matching phases.
//!
//! Deficient vertices within distance two of each other form a cluster. A
//! profile is one way to satisfy a cluster: some edges inside its
//! neighborhood plus some edge endpoints ("slots") whose partners lie
//! elsewhere. Profiles come from a bounded search that repeatedly fixes the
//! first unsatisfied vertex, treating every slot partner as a fresh vertex.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::check::Mode;
use crate::graph::{normalize, Edge, Graph, Vertex};

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(super) struct Config {
    /// `(vertex, requirement)`, sorted; a vertex appears at most twice. The
    /// requirement is the number of new sharers the partner must bring and is
    /// always 0 in the strong setting.
    pub(super) slots: Vec<(Vertex, u8)>,
    /// Sorted, normalized.
    pub(super) internal: Vec<Edge>,
}

impl Config {
    pub(super) fn cost(&self) -> usize {
        self.slots.len() + 2 * self.internal.len()
    }

    pub(super) fn degree(&self, g: &Graph, x: Vertex) -> usize {
        g.degree(x)
            + self.internal.iter().filter(|e| e.0 == x || e.1 == x).count()
            + self.slots.iter().filter(|s| s.0 == x).count()
    }

    /// Sharers the partner of a slot at `x` gains through `x`.
    pub(super) fn provides(&self, g: &Graph, x: Vertex) -> usize {
        self.degree(g, x) - 1
    }

    /// Slots that can take an isolated vertex.
    pub(super) fn absorbers(&self, g: &Graph) -> usize {
        self.slots
            .iter()
            .filter(|&&(x, req)| req == 0 && self.provides(g, x) >= 2)
            .count()
    }

    /// Summary used for selection: absorbers, slots, internal edges, total
    /// requirement, and the weakest provision (negated so smaller is better).
    pub(super) fn key(&self, g: &Graph) -> (usize, usize, usize, usize, isize) {
        let req: usize = self.slots.iter().map(|s| usize::from(s.1)).sum();
        let prov = self
            .slots
            .iter()
            .map(|s| self.provides(g, s.0))
            .min()
            .unwrap_or(2)
            .min(2);
        (
            self.absorbers(g),
            self.slots.len(),
            self.internal.len(),
            req,
            -(prov as isize),
        )
    }
}

pub(super) struct Cluster {
    pub(super) deficient: Vec<Vertex>,
    pub(super) comp: usize,
    pub(super) profiles: Vec<Config>,
    /// Cached `absorbers` per profile.
    pub(super) absorbers: Vec<usize>,
}

impl Cluster {
    /// Clusters of `deficient` with their profiles; a cluster whose search
    /// found nothing gets the empty profile and is left to the final repair.
    pub(super) fn build(g: &Graph, deficient: &[Vertex], mode: Mode) -> Vec<Cluster> {
        let comp = g.component_ids();
        clusters(g, deficient)
            .into_iter()
            .map(|d| {
                let mut profiles = Local::new(g, &d, mode).profiles();
                if profiles.is_empty() {
                    profiles.push(Config::default());
                }
                Cluster {
                    comp: comp[d[0]],
                    absorbers: profiles.iter().map(|c| c.absorbers(g)).collect(),
                    profiles,
                    deficient: d,
                }
            })
            .collect()
    }
}

/// Groups deficient vertices whose closed neighborhoods overlap.
pub(super) fn clusters(g: &Graph, deficient: &[Vertex]) -> Vec<Vec<Vertex>> {
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let n = g.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut owner = vec![usize::MAX; n];
    for &y in deficient {
        for x in std::iter::once(y).chain(g.neighbors(y).iter().copied()) {
            if owner[x] == usize::MAX {
                owner[x] = y;
            } else {
                let (a, b) = (find(&mut parent, owner[x]), find(&mut parent, y));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<Vertex>> = BTreeMap::new();
    for &y in deficient {
        let root = find(&mut parent, y);
        groups.entry(root).or_default().push(y);
    }
    groups.into_values().collect()
}

fn within(g: &Graph, from: &[Vertex], radius: usize) -> BTreeMap<Vertex, usize> {
    let mut dist: BTreeMap<Vertex, usize> = from.iter().map(|&v| (v, 0)).collect();
    let mut frontier = from.to_vec();
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
    dist
}

const SEARCH_NODES: usize = 60_000;
const MAX_INTERNAL: usize = 2;
/// Strong profiles kept per cluster.
const STRONG_PROFILES: usize = 8;

/// Bounded search for the ways to satisfy one cluster.
struct Local<'a> {
    g: &'a Graph,
    mode: Mode,
    deficient: &'a [Vertex],
    /// Non-edges that may be added inside the cluster's neighborhood.
    internal: Vec<Edge>,
    stamp: HashMap<Vertex, u32>,
    round: u32,
    nodes: usize,
}

impl<'a> Local<'a> {
    fn new(g: &'a Graph, deficient: &'a [Vertex], mode: Mode) -> Self {
        let near = within(g, deficient, 2);
        let mut internal = Vec::new();
        for (&p, &dp) in &near {
            if dp > 1 {
                continue;
            }
            for (&q, &dq) in &near {
                if p != q && !g.has_edge(p, q) && (dq > 1 || p < q) {
                    internal.push(normalize(p, q));
                }
            }
        }
        internal.sort_unstable();
        internal.dedup();
        Local {
            g,
            mode,
            deficient,
            internal,
            stamp: HashMap::new(),
            round: 0,
            nodes: 0,
        }
    }

    fn neighbors(&self, cfg: &Config, v: Vertex) -> Vec<Vertex> {
        let mut out: Vec<Vertex> = self.g.neighbors(v).to_vec();
        for &(a, b) in &cfg.internal {
            if a == v {
                out.push(b);
            } else if b == v {
                out.push(a);
            }
        }
        out
    }

    fn slots_at(cfg: &Config, v: Vertex) -> impl Iterator<Item = u8> + '_ {
        cfg.slots.iter().filter(move |s| s.0 == v).map(|s| s.1)
    }

    /// Sharer count of `y`, with every slot partner a fresh vertex carrying
    /// as many fresh neighbors as the slot requires. Strong sharing looks only
    /// through the original neighbors of `y`.
    fn sharers(&mut self, cfg: &Config, y: Vertex) -> usize {
        self.round += 1;
        let round = self.round;
        let mut count = 0;
        let through = match self.mode {
            Mode::Weak => self.neighbors(cfg, y),
            Mode::Strong => self.g.neighbors(y).to_vec(),
        };
        for w in through {
            for u in self.neighbors(cfg, w) {
                if u != y && self.stamp.insert(u, round) != Some(round) {
                    count += 1;
                }
            }
            // w's own fresh partners share w with y.
            count += Self::slots_at(cfg, w).count();
        }
        count + Self::slots_at(cfg, y).map(usize::from).sum::<usize>()
    }

    fn violation(&mut self, cfg: &Config) -> Option<Vertex> {
        self.deficient.iter().copied().find(|&y| self.sharers(cfg, y) < 2)
    }

    fn fixes(&self, cfg: &Config, y: Vertex) -> Vec<Config> {
        let mut touch: Vec<Vertex> = self.g.neighbors(y).to_vec();
        let max_req = match self.mode {
            Mode::Weak => {
                touch.push(y);
                2
            }
            Mode::Strong => 0,
        };
        let mut out = Vec::new();
        for &x in &touch {
            if Self::slots_at(cfg, x).count() >= 2 {
                continue;
            }
            for req in 0..=max_req {
                let mut c = cfg.clone();
                let pos = c.slots.partition_point(|&s| s <= (x, req));
                c.slots.insert(pos, (x, req));
                out.push(c);
            }
        }
        if cfg.internal.len() < MAX_INTERNAL {
            for &e in &self.internal {
                if (touch.contains(&e.0) || touch.contains(&e.1)) && !cfg.internal.contains(&e) {
                    let mut c = cfg.clone();
                    let pos = c.internal.partition_point(|&f| f < e);
                    c.internal.insert(pos, e);
                    out.push(c);
                }
            }
        }
        out
    }

    fn dfs(&mut self, cfg: Config, budget: usize, seen: &mut HashSet<Config>, found: &mut Vec<Config>) {
        if self.nodes >= SEARCH_NODES || !seen.insert(cfg.clone()) {
            return;
        }
        self.nodes += 1;
        let Some(y) = self.violation(&cfg) else {
            found.push(cfg);
            return;
        };
        for next in self.fixes(&cfg, y) {
            if next.cost() <= budget {
                self.dfs(next, budget, seen, found);
            }
        }
    }

    /// Non-dominated configurations, cheapest first. Empty if the search
    /// budget ran out before anything was found.
    fn profiles(mut self) -> Vec<Config> {
        let budget = (2 * self.deficient.len() + 4).min(10);
        let mut found = Vec::new();
        self.dfs(Config::default(), budget, &mut HashSet::new(), &mut found);
        let Some(cheapest) = found.iter().map(Config::cost).min() else {
            return Vec::new();
        };
        let g = self.g;
        if self.mode == Mode::Strong {
            found.retain(|c| c.cost() <= cheapest + 1);
            found.sort_by_key(|c| (c.cost(), c.clone()));
            found.dedup();
            found.truncate(STRONG_PROFILES);
            return found;
        }
        found.retain(|c| c.cost() <= cheapest + 3);
        found.sort_by_key(|c| (c.cost(), c.key(g), c.clone()));
        let mut best: Vec<Config> = Vec::new();
        for c in found {
            if !best.iter().any(|b| b.key(g) == c.key(g)) {
                best.push(c);
            }
        }
        let dominated = |c: &Config, by: &Config| {
            let (ca, ct, ci, cr, cp) = c.key(g);
            let (ba, bt, bi, br, bp) = by.key(g);
            (ba, bt, bi, br, bp) != (ca, ct, ci, cr, cp)
                && bi <= ci
                && bt <= ct
                && bt - ba.min(bt) <= ct - ca.min(ct)
                && br <= cr
                && bp <= cp
        };
        best.iter()
            .filter(|c| !best.iter().any(|b| dominated(c, b)))
            .cloned()
            .collect()
    }
}
