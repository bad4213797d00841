//! Strong (2,1) matching phase.
//!
//! Slots of the chosen profiles are grouped into units, one per slot vertex,
//! with multiplicity 1 or 2. Units are paired by a simple b-matching so that
//! no two units are joined twice. Two slots serving the same vertex must not
//! share a partner, which the matching cannot express; a swap pass repairs
//! such collisions afterwards.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::profile::{Cluster, Config};
use super::weak::SWAP_CLUSTERS;
use super::{Builder, StrongMode, P21};
use crate::check::{strong_residual, Mode};
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::matching::max_matching;
use crate::plan::EdgePlan;

pub fn anonymize_strong_21(g: &Graph, mode: StrongMode, seed: u64) -> Result<EdgePlan> {
    if let Some(v) = g.vertices().find(|&v| g.degree(v) == 0) {
        return Err(Error::IsolatedVertex(v));
    }
    let report = strong_residual(g, g, P21)?;
    if report.total == 0 {
        return Ok(EdgePlan::build(g, Vec::new(), P21, Mode::Strong));
    }
    // Completing to K_n gives v every vertex outside {v} as a sharer when
    // deg(v) >= 2, and every vertex outside {v, w} when w is its only neighbor.
    let n = g.vertex_count();
    if g.vertices().any(|v| n < if g.degree(v) == 1 { 4 } else { 3 }) {
        return Err(Error::TooSmall(format!(
            "no strong (2,1)-transformation exists on {} vertices",
            g.vertex_count()
        )));
    }
    let clusters = Cluster::build(g, &report.deficient, Mode::Strong);
    let mut picks = vec![0; clusters.len()];
    let plan_for = |picks: &[usize]| {
        let chosen: Vec<&Config> = clusters.iter().zip(picks).map(|(c, &j)| &c.profiles[j]).collect();
        realize(g, &clusters, &chosen, mode, seed)
    };
    let mut best = plan_for(&picks);
    if mode == StrongMode::Exact && clusters.len() <= SWAP_CLUSTERS {
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

struct Unit {
    x: Vertex,
    cluster: usize,
    mult: u8,
}

fn realize(g: &Graph, clusters: &[Cluster], chosen: &[&Config], mode: StrongMode, seed: u64) -> EdgePlan {
    let mut b = Builder::new(g);
    for cfg in chosen {
        for &(u, v) in &cfg.internal {
            if b.can_add(u, v) {
                b.add(u, v);
            }
        }
    }
    let mut units: Vec<Unit> = Vec::new();
    for (k, cfg) in chosen.iter().enumerate() {
        for &(x, _) in &cfg.slots {
            match units.last_mut() {
                Some(u) if u.cluster == k && u.x == x => u.mult += 1,
                _ => units.push(Unit { x, cluster: k, mult: 1 }),
            }
        }
    }

    let mut allowed = Vec::new();
    for i in 0..units.len() {
        for j in i + 1..units.len() {
            let (a, c) = (&units[i], &units[j]);
            if a.cluster == c.cluster || !b.can_add(a.x, c.x) {
                continue;
            }
            let (ka, kc) = (&clusters[a.cluster], &clusters[c.cluster]);
            if ka.comp != kc.comp {
                allowed.push((i, j));
                continue;
            }
            // Inside one component the partner must look fresh to every
            // vertex the slot serves, as it would from another component.
            let fresh = |u: &Unit, k: &Cluster, p: Vertex| {
                k.deficient
                    .iter()
                    .filter(|&&d| g.has_edge(d, u.x))
                    .all(|&d| d != p && !strong_sharer(&b, d, p))
            };
            let single = chosen[a.cluster].slots.len() == 1 && chosen[c.cluster].slots.len() == 1;
            let need: Vec<Vertex> = ka.deficient.iter().chain(&kc.deficient).copied().collect();
            if (fresh(a, ka, c.x) && fresh(c, kc, a.x)) || (single && b.trial(a.x, c.x, &need, Mode::Strong)) {
                allowed.push((i, j));
            }
        }
    }
    let mut copies = Vec::new();
    for (i, u) in units.iter().enumerate() {
        copies.extend(std::iter::repeat_n(i, usize::from(u.mult)));
    }
    let mult: Vec<u8> = units.iter().map(|u| u.mult).collect();
    let mut pairs = strong_matching(&copies, &mult, &allowed, mode, seed);
    untangle(g, &units, &allowed, &mut pairs);

    let mut used = vec![0u8; units.len()];
    for &(i, j) in &pairs {
        used[i] += 1;
        used[j] += 1;
        b.add(units[i].x, units[j].x);
    }
    for (i, u) in units.iter().enumerate() {
        for _ in used[i]..u.mult {
            let pending: Vec<Vertex> = clusters[u.cluster]
                .deficient
                .iter()
                .copied()
                .filter(|&y| g.has_edge(u.x, y) && !b.ok(y, Mode::Strong))
                .collect();
            if pending.is_empty() {
                break;
            }
            let partner = b
                .partner_order(u.x)
                .into_iter()
                .find(|&p| pending.iter().all(|&y| p != y && !strong_sharer(&b, y, p)));
            match partner {
                Some(p) => b.add(u.x, p),
                None => break,
            }
        }
    }
    b.repair(Mode::Strong);
    EdgePlan::build(g, b.added, P21, Mode::Strong)
}

/// Number of pairs of matched edges where two units of one cluster whose
/// slot vertices have a common original neighbor meet the same partner.
fn collisions(g: &Graph, units: &[Unit], pairs: &[(usize, usize)]) -> usize {
    let serve_same = |p: usize, r: usize| {
        p != r
            && units[p].cluster == units[r].cluster
            && g.neighbors(units[p].x).iter().any(|&y| g.has_edge(y, units[r].x))
    };
    let mut count = 0;
    for (s, &(a, c)) in pairs.iter().enumerate() {
        for &(d, e) in &pairs[s + 1..] {
            let hit = (c == e && serve_same(a, d))
                || (c == d && serve_same(a, e))
                || (a == e && serve_same(c, d))
                || (a == d && serve_same(c, e));
            count += usize::from(hit);
        }
    }
    count
}

/// Such collisions leave the common neighbor one sharer short. Exchanges
/// partners between two matched pairs while that lowers the count.
fn untangle(g: &Graph, units: &[Unit], allowed: &[(usize, usize)], pairs: &mut [(usize, usize)]) {
    let ok: BTreeSet<(usize, usize)> = allowed.iter().copied().collect();
    let key = |a: usize, c: usize| (a.min(c), a.max(c));
    let mut current = collisions(g, units, pairs);
    while current > 0 {
        let mut improved = false;
        'search: for s in 0..pairs.len() {
            for t in s + 1..pairs.len() {
                let ((a, c), (d, e)) = (pairs[s], pairs[t]);
                for (x, y) in [(key(a, d), key(c, e)), (key(a, e), key(c, d))] {
                    if x.0 == x.1 || y.0 == y.1 || !ok.contains(&x) || !ok.contains(&y) || x == y {
                        continue;
                    }
                    if pairs
                        .iter()
                        .enumerate()
                        .any(|(i, &p)| i != s && i != t && (p == x || p == y))
                    {
                        continue;
                    }
                    let old = (pairs[s], pairs[t]);
                    pairs[s] = x;
                    pairs[t] = y;
                    let now = collisions(g, units, pairs);
                    if now < current {
                        current = now;
                        improved = true;
                        break 'search;
                    }
                    pairs[s] = old.0;
                    pairs[t] = old.1;
                }
            }
        }
        if !improved {
            return;
        }
    }
}

/// Whether `p` already shares an original neighbor of `y` in the working graph.
fn strong_sharer(b: &Builder<'_>, y: Vertex, p: Vertex) -> bool {
    b.g.neighbors(y).iter().any(|&w| b.work.has_edge(w, p))
}

/// Pairs deficit copies for the strong matching phase. Units with two
/// deficits may not be joined twice to the same unit.
fn strong_matching(
    copies: &[usize],
    mult: &[u8],
    allowed_units: &[(usize, usize)],
    mode: StrongMode,
    seed: u64,
) -> Vec<(usize, usize)> {
    let mut copy_ids: Vec<Vec<usize>> = vec![Vec::new(); mult.len()];
    for (c, &u) in copies.iter().enumerate() {
        copy_ids[u].push(c);
    }
    match mode {
        StrongMode::Linear => {
            let mut order = allowed_units.to_vec();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let mut free: Vec<usize> = mult.iter().map(|&m| usize::from(m)).collect();
            let mut out = Vec::new();
            for (a, c) in order {
                if free[a] > 0 && free[c] > 0 {
                    free[a] -= 1;
                    free[c] -= 1;
                    out.push((a, c));
                }
            }
            out
        }
        StrongMode::Exact => {
            // Simple b-matching via gadgets: a pair of multi-deficit units gets
            // two gadget vertices joined to each other and to the unit copies.
            let mut next = copies.len();
            let mut edges = Vec::new();
            let mut gadget = Vec::new();
            for &(a, c) in allowed_units {
                if mult[a] > 1 && mult[c] > 1 {
                    let (ga, gc) = (next, next + 1);
                    next += 2;
                    edges.push((ga, gc));
                    edges.extend(copy_ids[a].iter().map(|&x| (ga, x)));
                    edges.extend(copy_ids[c].iter().map(|&x| (gc, x)));
                    gadget.push((ga, gc, a, c));
                } else {
                    for &x in &copy_ids[a] {
                        for &y in &copy_ids[c] {
                            edges.push((x, y));
                        }
                    }
                }
            }
            let ids: Vec<usize> = (0..next).collect();
            let m = max_matching(&ids, &edges);
            let mut out = Vec::new();
            for &(x, y) in &m.pairs {
                if x < copies.len() && y < copies.len() {
                    out.push((copies[x], copies[y]));
                }
            }
            for (ga, gc, a, c) in gadget {
                let ma = m.mate_of(ga).is_some_and(|x| x < copies.len());
                let mc = m.mate_of(gc).is_some_and(|x| x < copies.len());
                if ma && mc {
                    out.push((a, c));
                }
            }
            out
        }
    }
}
