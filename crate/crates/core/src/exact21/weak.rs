//! Weak (2,1) matching phase.
//!
//! Picks one profile per cluster with a small dynamic program over the
//! isolated vertices and isolated edges of the graph, realizes the choice by
//! matching slots, then tries single-cluster profile swaps checked by full
//! realization. In the weak setting a slot *requires* its partner to bring 0,
//! 1 or 2 new sharers and *provides* its partner with as many sharers as it
//! has other neighbors.

use std::collections::{BTreeMap, HashSet};

use super::profile::{Cluster, Config};
use super::{Builder, P21};
use crate::check::{residual, Mode};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Vertex};
use crate::matching::{greedy_matching, max_matching};
use crate::plan::EdgePlan;

/// Above this many clusters the swap pass is skipped.
pub(super) const SWAP_CLUSTERS: usize = 64;

/// Cost of the isolated vertices, isolated edges and leftover pool, doubled,
/// given `absorbed` isolated vertices taken by `Any` slots and the parity of
/// the total slot count.
fn outside_cost(z: usize, e: usize, absorbed: usize, parity: usize) -> usize {
    let a_e = z.min(e);
    let z2 = z - a_e - absorbed;
    let (hubs, rest) = (z2 / 3, z2 % 3);
    let pool_parity = (parity + absorbed + hubs + a_e) % 2;
    a_e + absorbed + 5 * hubs + 2 * rest + 2 * e + pool_parity
}

/// Picks one profile per cluster minimizing the predicted edge count.
fn choose(clusters: &[Cluster], z: usize, e: usize) -> Vec<usize> {
    let z1 = z - z.min(e);
    let width = 2 * (z1 + 1);
    let idx = |h: usize, p: usize| 2 * h + p;
    let mut value: Vec<Option<usize>> = vec![None; width];
    value[0] = Some(0);
    let mut back: Vec<Vec<Option<(usize, usize)>>> = Vec::with_capacity(clusters.len());
    for c in clusters {
        let mut next: Vec<Option<usize>> = vec![None; width];
        let mut from = vec![None; width];
        for h in 0..=z1 {
            for p in 0..2 {
                let Some(v) = value[idx(h, p)] else { continue };
                for (j, cfg) in c.profiles.iter().enumerate() {
                    let t = cfg.slots.len();
                    let s = idx((h + c.absorbers[j]).min(z1), (p + t) % 2);
                    let nv = v + 2 * cfg.internal.len() + t;
                    if next[s].is_none_or(|cur| nv < cur) {
                        next[s] = Some(nv);
                        from[s] = Some((idx(h, p), j));
                    }
                }
            }
        }
        value = next;
        back.push(from);
    }
    let mut best: Option<(usize, usize)> = None;
    for h in 0..=z1 {
        for p in 0..2 {
            if let Some(v) = value[idx(h, p)] {
                let total = v + outside_cost(z, e, h, p);
                if best.is_none_or(|(bt, _)| total < bt) {
                    best = Some((total, idx(h, p)));
                }
            }
        }
    }
    let mut state = best.expect("the empty choice is always reachable").1;
    let mut picks = vec![0; clusters.len()];
    for k in (0..clusters.len()).rev() {
        let (prev, j) = back[k][state].expect("reachable state has a predecessor");
        picks[k] = j;
        state = prev;
    }
    picks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Item {
    /// Slot `j` of the chosen configuration of cluster `k`.
    Slot(usize, usize),
    Hub(Vertex),
    /// One of the two endpoint slots of isolated edge `e`, both at its head.
    Pair(usize),
}

pub fn anonymize_weak_21(g: &Graph, seed: u64) -> Result<EdgePlan> {
    let n = g.vertex_count();
    let report = residual(g, P21);
    if report.total == 0 {
        return Ok(EdgePlan::build(g, Vec::new(), P21, Mode::Weak));
    }
    if n <= 2 {
        return Err(Error::TooSmall(format!(
            "(2,1)-anonymity needs at least 3 vertices, got {n}"
        )));
    }
    let iso: Vec<Vertex> = g.vertices().filter(|&v| g.degree(v) == 0).collect();
    let pairs: Vec<Edge> = g
        .edges()
        .filter(|&(u, v)| g.degree(u) == 1 && g.degree(v) == 1)
        .collect();
    let deficient: Vec<Vertex> = report
        .deficient
        .iter()
        .copied()
        .filter(|&v| g.degree(v) > 0 && !(g.degree(v) == 1 && g.degree(g.neighbors(v)[0]) == 1))
        .collect();
    let clusters = Cluster::build(g, &deficient, Mode::Weak);
    let mut picks = choose(&clusters, iso.len(), pairs.len());
    let plan_for = |picks: &[usize]| {
        let chosen: Vec<&Config> = clusters.iter().zip(picks).map(|(c, &j)| &c.profiles[j]).collect();
        realize(g, seed, &clusters, &chosen, iso.clone(), &pairs)
    };
    let mut best = plan_for(&picks);
    if clusters.len() <= SWAP_CLUSTERS {
        let mut improved = true;
        while improved {
            improved = false;
            for k in 0..clusters.len() {
                for j in 0..clusters[k].profiles.len() {
                    if j == picks[k] {
                        continue;
                    }
                    let mut trial = picks.clone();
                    trial[k] = j;
                    let plan = plan_for(&trial);
                    if plan.edge_count() < best.edge_count() {
                        best = plan;
                        picks = trial;
                        improved = true;
                    }
                }
            }
        }
    }
    Ok(best)
}

fn realize(
    g: &Graph,
    seed: u64,
    clusters: &[Cluster],
    chosen: &[&Config],
    mut iso: Vec<Vertex>,
    pairs: &[Edge],
) -> EdgePlan {
    let mut b = Builder::new(g);
    for cfg in chosen {
        for &(u, v) in &cfg.internal {
            if b.can_add(u, v) {
                b.add(u, v);
            }
        }
    }
    iso.reverse();

    // Isolated edges take one isolated vertex at their head, then slots that
    // need nothing and provide two sharers do.
    let mut pair_slots = vec![2usize; pairs.len()];
    for (e, &(u, _)) in pairs.iter().enumerate() {
        if let Some(i) = iso.pop() {
            b.add(u, i);
            pair_slots[e] = 1;
        }
    }
    let mut open: Vec<Vec<bool>> = chosen.iter().map(|c| vec![true; c.slots.len()]).collect();
    for (k, cfg) in chosen.iter().enumerate() {
        for (j, &(x, req)) in cfg.slots.iter().enumerate() {
            if req == 0 && cfg.provides(g, x) >= 2 {
                if let Some(i) = iso.pop() {
                    b.add(x, i);
                    open[k][j] = false;
                }
            }
        }
    }
    let mut hubs = Vec::new();
    while iso.len() >= 3 {
        let (h, x, y) = (iso.pop().unwrap(), iso.pop().unwrap(), iso.pop().unwrap());
        b.add(h, x);
        b.add(h, y);
        hubs.push(h);
    }

    let mut items = Vec::new();
    for (k, slots) in open.iter().enumerate() {
        items.extend((0..slots.len()).filter(|&j| slots[j]).map(|j| Item::Slot(k, j)));
    }
    items.extend(hubs.iter().map(|&h| Item::Hub(h)));
    for (e, &s) in pair_slots.iter().enumerate() {
        items.extend(std::iter::repeat_n(Item::Pair(e), s));
    }
    let open_count: Vec<usize> = open.iter().map(|s| s.iter().filter(|&&o| o).count()).collect();
    let at = |item: Item| -> Vertex {
        match item {
            Item::Slot(k, j) => chosen[k].slots[j].0,
            Item::Hub(h) => h,
            Item::Pair(e) => pairs[e].0,
        }
    };

    // (requirement, provision) of each item; an isolated edge with both slots
    // open ends up providing two once both are filled.
    let terms = |item: Item| -> (usize, usize) {
        match item {
            Item::Slot(k, j) => {
                let (x, req) = chosen[k].slots[j];
                (usize::from(req), chosen[k].provides(g, x))
            }
            Item::Hub(_) => (2, 2),
            Item::Pair(e) => (if pair_slots[e] == 2 { 1 } else { 2 }, 2),
        }
    };
    let mut allowed = Vec::new();
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            let ((ri, pi), (rj, pj)) = (terms(items[i]), terms(items[j]));
            if pi < rj || pj < ri {
                continue;
            }
            let ok = match (items[i], items[j]) {
                (Item::Pair(a), Item::Pair(c)) => a != c,
                (Item::Slot(a, _), Item::Slot(c, _)) if a == c => false,
                (Item::Slot(a, x), Item::Slot(c, y)) if clusters[a].comp == clusters[c].comp => {
                    // Only single-slot clusters can be checked in isolation.
                    let (u, v) = (chosen[a].slots[x].0, chosen[c].slots[y].0);
                    let need: Vec<Vertex> = clusters[a]
                        .deficient
                        .iter()
                        .chain(&clusters[c].deficient)
                        .copied()
                        .collect();
                    chosen[a].slots.len() == 1 && chosen[c].slots.len() == 1 && b.trial(u, v, &need, Mode::Weak)
                }
                _ => true,
            };
            if ok {
                allowed.push((i, j));
            }
        }
    }
    let ids: Vec<usize> = (0..items.len()).collect();
    let mut matching = greedy_matching(&ids, &allowed, seed);
    if items.len() >= 2 * matching.len() + 2 {
        let best = max_matching(&ids, &allowed);
        if best.len() > matching.len() {
            matching = best;
        }
    }

    let mut matched = vec![false; items.len()];
    let mut pair_links: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &(i, j) in &matching.pairs {
        matched[i] = true;
        matched[j] = true;
        if let (Item::Pair(a), Item::Pair(c)) = (items[i], items[j]) {
            *pair_links.entry((a.min(c), a.max(c))).or_default() += 1;
        }
    }
    let mut done = HashSet::new();
    for &(i, j) in &matching.pairs {
        if let (Item::Pair(a), Item::Pair(c)) = (items[i], items[j]) {
            let key = (a.min(c), a.max(c));
            if pair_links[&key] == 2 {
                if done.insert(key) {
                    // Two isolated edges uv, u'v': add uu' and vu'.
                    let (u, v) = pairs[key.0];
                    let up = pairs[key.1].0;
                    b.add(u, up);
                    b.add(v, up);
                }
                continue;
            }
        }
        let (x, y) = (at(items[i]), at(items[j]));
        if b.can_add(x, y) {
            b.add(x, y);
        } else {
            // A vertex holding two slots met both slots of one isolated edge.
            let other = |item: Item, v: Vertex| match item {
                Item::Pair(e) if pairs[e].0 == v => Some(pairs[e].1),
                _ => None,
            };
            if let Some(y2) = other(items[j], y).filter(|&y2| b.can_add(x, y2)) {
                b.add(x, y2);
            } else if let Some(x2) = other(items[i], x).filter(|&x2| b.can_add(x2, y)) {
                b.add(x2, y);
            }
        }
    }

    // Leftovers: one edge each, two for an isolated edge left with both slots.
    let mut remaining = open_count.clone();
    for (idx, &item) in items.iter().enumerate() {
        if matched[idx] {
            if let Item::Slot(k, _) = item {
                remaining[k] -= 1;
            }
        }
    }
    let mut seen_pair = HashSet::new();
    for (idx, &item) in items.iter().enumerate() {
        if matched[idx] {
            continue;
        }
        match item {
            Item::Slot(k, j) => {
                let x = chosen[k].slots[j].0;
                remaining[k] -= 1;
                if remaining[k] == 0 {
                    b.anchor(&[x], &clusters[k].deficient, Mode::Weak);
                } else if let Some(p) = b.partner_order(x).into_iter().next() {
                    b.add(x, p);
                }
            }
            Item::Hub(h) => {
                b.anchor(&[h], &[h], Mode::Weak);
            }
            Item::Pair(e) => {
                let (u, v) = pairs[e];
                let both = pair_slots[e] == 2
                    && items
                        .iter()
                        .enumerate()
                        .filter(|&(t, &it)| it == Item::Pair(e) && !matched[t])
                        .count()
                        == 2;
                if both {
                    if seen_pair.insert(e) {
                        let p = iso.pop().unwrap_or_else(|| {
                            b.work
                                .vertices()
                                .filter(|&p| p != u && p != v)
                                .min_by_key(|&p| (b.comp[p] == b.comp[u], p))
                                .expect("n >= 3")
                        });
                        b.add(u, p);
                        b.add(v, p);
                    }
                } else {
                    b.anchor(&[u, v], &[u, v], Mode::Weak);
                }
            }
        }
    }
    while let Some(i) = iso.pop() {
        b.anchor(&[i], &[i], Mode::Weak);
    }
    b.repair(Mode::Weak);
    EdgePlan::build(g, b.added, P21, Mode::Weak)
}
