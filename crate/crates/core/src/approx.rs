//! (k,ℓ)-anonymization for ℓ > 1.
//!
//! The weak algorithm groups vertices into supernodes of ℓ, links supernodes
//! by a random regular graph and expands every link into a complete bipartite
//! graph, so each vertex shares a whole supernode with everything two links
//! away. The strong algorithm adds, each round, up to ℓ edges at one vertex
//! chosen to cut residual anonymity the most.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::check::{residual, AnonParams, Mode};
use crate::error::{Error, Result};
use crate::graph::{normalize, Edge, Graph, Vertex};
use crate::greedy::strong_feasible;
use crate::plan::{EdgePlan, TraceStep};
use crate::tracker::Tracker;

/// Vertices split into groups of `group_size`, with the `n mod group_size`
/// leftovers dealt round-robin as overflow members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupernodePartition {
    pub groups: Vec<Vec<Vertex>>,
    pub group_size: usize,
    /// Group index of each vertex.
    pub assignment: Vec<usize>,
}

impl SupernodePartition {
    /// Random partition of `0..n`. Needs `n >= group_size`.
    pub fn random(n: usize, group_size: usize, rng: &mut ChaCha8Rng) -> Self {
        assert!(group_size > 0 && n >= group_size);
        let mut order: Vec<Vertex> = (0..n).collect();
        order.shuffle(rng);
        let count = n / group_size;
        let mut groups: Vec<Vec<Vertex>> = order[..count * group_size]
            .chunks(group_size)
            .map(<[Vertex]>::to_vec)
            .collect();
        for (i, &v) in order[count * group_size..].iter().enumerate() {
            groups[i % count].push(v);
        }
        for group in &mut groups {
            group.sort_unstable();
        }
        let mut assignment = vec![0; n];
        for (i, group) in groups.iter().enumerate() {
            for &v in group {
                assignment[v] = i;
            }
        }
        SupernodePartition {
            groups,
            group_size,
            assignment,
        }
    }

    /// Groups are disjoint, cover every vertex, hold at least `group_size`
    /// members each and differ in size by at most one.
    pub fn is_valid(&self) -> bool {
        let n = self.assignment.len();
        let mut seen = vec![false; n];
        let largest = self.groups.iter().map(Vec::len).max().unwrap_or(0);
        for (i, group) in self.groups.iter().enumerate() {
            if group.len() < self.group_size || group.len() + 1 < largest {
                return false;
            }
            for &v in group {
                if v >= n || seen[v] || self.assignment[v] != i {
                    return false;
                }
                seen[v] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// What [`weak_expander_detailed`] built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpanderOutcome {
    pub plan: EdgePlan,
    pub partition: SupernodePartition,
    /// Links per supernode in the random regular graph.
    pub degree: usize,
    /// Links between supernodes, as group index pairs.
    pub links: Vec<Edge>,
    /// Edges added by the final repair; zero when the expander sufficed.
    pub repair_edges: usize,
    /// The minimum sharer count the construction started from.
    pub k_prime: usize,
}

/// Weak (k,ℓ)-anonymization by supernode expansion; see
/// [`weak_expander_detailed`].
pub fn weak_expander(g: &Graph, k: usize, ell: usize, seed: u64) -> Result<EdgePlan> {
    weak_expander_detailed(g, k, ell, seed, None).map(|o| o.plan)
}

/// Supernode expansion with its intermediate structure.
///
/// `k_prime` overrides the measured minimum sharer count of `g`. The link
/// degree is `ceil(sqrt(max(k - k', 1) / ell)) + 1`, capped by the number of
/// other supernodes. Any vertex still deficient afterwards gets stars of
/// `ell` edges from its best non-sharer into its neighborhood.
pub fn weak_expander_detailed(
    g: &Graph,
    k: usize,
    ell: usize,
    seed: u64,
    k_prime: Option<usize>,
) -> Result<ExpanderOutcome> {
    let p = AnonParams::new(k, ell)?;
    let n = g.vertex_count();
    if ell > k || 2 * k > n || n < 2 * ell {
        return Err(Error::BadParams(format!(
            "expander needs ell <= k <= n/2 and n >= 2*ell (k={k}, ell={ell}, n={n})"
        )));
    }
    let report = residual(g, p);
    let k_prime = k_prime.unwrap_or_else(|| report.sharer_count.iter().copied().min().unwrap_or(0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let partition = SupernodePartition::random(n, ell, &mut rng);
    if report.total == 0 {
        return Ok(ExpanderOutcome {
            plan: EdgePlan::build(g, Vec::new(), p, Mode::Weak),
            partition,
            degree: 0,
            links: Vec::new(),
            repair_edges: 0,
            k_prime,
        });
    }
    let m = partition.groups.len();
    let need = k.saturating_sub(k_prime).max(1) as f64 / ell as f64;
    let degree = (need.sqrt().ceil() as usize + 1).min(m - 1);
    let links = regular_links(m, degree, &mut rng);

    let mut added = Vec::new();
    let mut work = g.clone();
    for &(a, b) in &links {
        for &x in &partition.groups[a] {
            for &y in &partition.groups[b] {
                if !work.has_edge(x, y) {
                    work.insert_unchecked(x, y);
                    added.push(normalize(x, y));
                }
            }
        }
    }
    let expanded = added.len();
    let mut tracker = Tracker::new(&work, p, Mode::Weak);
    while tracker.total() > 0 {
        let v = tracker.deficient().next().expect("positive residual");
        let star = repair_star(&mut tracker, v, ell);
        if star.is_empty() {
            return Err(Error::Stuck(tracker.total()));
        }
        added.extend(tracker.apply(&star));
    }
    let repair_edges = added.len() - expanded;
    Ok(ExpanderOutcome {
        plan: EdgePlan::build(g, added, p, Mode::Weak),
        partition,
        degree,
        links,
        repair_edges,
        k_prime,
    })
}

/// A `degree`-regular simple graph on `m` nodes as a union of random perfect
/// matchings. With `m` odd, node 0 takes part twice in every matching.
/// Matchings that would repeat a link are resampled; if that keeps failing,
/// the round keeps whatever non-repeating pairs a greedy pass finds.
fn regular_links(m: usize, degree: usize, rng: &mut ChaCha8Rng) -> Vec<Edge> {
    const TRIES: usize = 200;
    let mut links: BTreeSet<Edge> = BTreeSet::new();
    let mut slots: Vec<usize> = (0..m).collect();
    if m % 2 == 1 {
        slots.push(0);
    }
    let usable = |links: &BTreeSet<Edge>, a: usize, b: usize| a != b && !links.contains(&normalize(a, b));
    for _ in 0..degree {
        let mut round = None;
        for _ in 0..TRIES {
            slots.shuffle(rng);
            let pairs: Vec<Edge> = slots.chunks(2).map(|c| normalize(c[0], c[1])).collect();
            let distinct: BTreeSet<Edge> = pairs.iter().copied().collect();
            if distinct.len() == pairs.len() && pairs.iter().all(|&(a, b)| usable(&links, a, b)) {
                round = Some(pairs);
                break;
            }
        }
        let pairs = round.unwrap_or_else(|| {
            slots.shuffle(rng);
            let mut used = vec![false; slots.len()];
            let mut pairs: Vec<Edge> = Vec::new();
            for i in 0..slots.len() {
                if used[i] {
                    continue;
                }
                for j in i + 1..slots.len() {
                    let e = normalize(slots[i], slots[j]);
                    if !used[j] && usable(&links, e.0, e.1) && !pairs.contains(&e) {
                        used[i] = true;
                        used[j] = true;
                        pairs.push(e);
                        break;
                    }
                }
            }
            pairs
        });
        links.extend(pairs);
    }
    links.into_iter().collect()
}

/// Edges from the non-sharer of `v` that gains the most into `ell` of the
/// neighbors of `v`. When no vertex can be reached that way `v` gets one more
/// neighbor instead.
fn repair_star(tracker: &mut Tracker<'_>, v: Vertex, ell: usize) -> Vec<Edge> {
    let cur = tracker.graph().clone();
    let nv = cur.neighbors(v);
    let mut best: Option<(usize, usize, Vec<Edge>)> = None;
    for u in cur.vertices() {
        if u == v {
            continue;
        }
        let mut have = 0;
        let mut missing = Vec::new();
        for &w in nv {
            if w == u {
                continue;
            }
            if cur.has_edge(u, w) {
                have += 1;
            } else {
                missing.push(normalize(u, w));
            }
        }
        if have >= ell || have + missing.len() < ell {
            continue;
        }
        missing.truncate(ell - have);
        let gain = tracker.gain(&missing);
        let better = match &best {
            None => gain > 0,
            Some((bg, bn, _)) => gain > *bg || (gain == *bg && missing.len() < *bn),
        };
        if better {
            best = Some((gain, missing.len(), missing));
        }
    }
    match best {
        Some((_, _, e)) => e,
        None => cur
            .vertices()
            .filter(|&x| x != v && !cur.has_edge(v, x))
            .max_by_key(|&x| (tracker.gain(&[normalize(v, x)]), std::cmp::Reverse(x)))
            .map(|x| vec![normalize(v, x)])
            .unwrap_or_default(),
    }
}

/// Strong (k,ℓ)-anonymization by greedy groups of at most `ell` edges.
///
/// Candidates pair a deficient vertex `v` with another vertex `u`: the
/// fewest edges from `u` to the original neighbors of `v` that make `u` a
/// strong sharer of `v`, lowest-indexed neighbors first. Each round adds the
/// candidate with the largest residual reduction; ties go to fewer edges,
/// then to the lowest edge list.
pub fn strong_greedy_kl(g: &Graph, k: usize, ell: usize) -> Result<EdgePlan> {
    let p = AnonParams::new(k, ell)?;
    strong_feasible(g, p)?;
    let mut tracker = Tracker::new(g, p, Mode::Strong);
    let mut added = Vec::new();
    let mut trace = Vec::new();
    while tracker.total() > 0 {
        let deficient: Vec<Vertex> = tracker.deficient().collect();
        let mut best: Option<(usize, Vec<Edge>)> = None;
        for &v in &deficient {
            for u in g.vertices() {
                if u == v {
                    continue;
                }
                let cur = tracker.graph();
                let mut have = 0;
                let mut missing = Vec::new();
                for &w in g.neighbors(v) {
                    if w == u {
                        continue;
                    }
                    if cur.has_edge(u, w) {
                        have += 1;
                    } else {
                        missing.push(normalize(u, w));
                    }
                }
                if have >= ell || have + missing.len() < ell {
                    continue;
                }
                missing.truncate(ell - have);
                missing.sort_unstable();
                let gain = tracker.gain(&missing);
                let take = match &best {
                    None => gain > 0,
                    Some((bg, b)) => {
                        (gain, std::cmp::Reverse(missing.len()), std::cmp::Reverse(&missing))
                            > (*bg, std::cmp::Reverse(b.len()), std::cmp::Reverse(b))
                    }
                };
                if take {
                    best = Some((gain, missing));
                }
            }
        }
        let (_, group) = best.ok_or(Error::Stuck(tracker.total()))?;
        let before = tracker.total();
        let fresh = tracker.apply(&group);
        trace.push(TraceStep {
            edges: fresh.clone(),
            residual_before: before,
            residual_after: tracker.total(),
        });
        added.extend(fresh);
    }
    let mut plan = EdgePlan::build(g, added, p, Mode::Strong);
    plan.trace = trace;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::check::{is_kl_anonymous, is_strong_transformation};
    use crate::hardgen::random_graph;
    use crate::oracle::{oracle_strong, OracleOptions};

    fn params(k: usize, ell: usize) -> AnonParams {
        AnonParams::new(k, ell).unwrap()
    }

    #[test]
    fn k33_from_six_vertices() {
        let out = weak_expander_detailed(&Graph::new(6), 3, 3, 0, None).unwrap();
        assert_eq!(out.links.len(), 1);
        // K_{3,3} gives each vertex only the two others on its side.
        let k33: Vec<Edge> = out.plan.added_edges[..9].to_vec();
        let bare = Graph::from_edges(6, k33.iter().copied()).unwrap();
        assert!(k33
            .iter()
            .all(|&(a, b)| out.partition.assignment[a] != out.partition.assignment[b]));
        assert!(!is_kl_anonymous(&bare, params(3, 3)));
        assert!(out.repair_edges > 0);
        assert!(is_kl_anonymous(&out.plan.result, params(3, 3)));
    }

    #[test]
    fn anonymous_input_gets_nothing() {
        let plan = weak_expander(&Graph::complete(8), 3, 2, 0).unwrap();
        assert_eq!(plan.edge_count(), 0);
        assert_eq!(strong_greedy_kl(&Graph::complete(6), 3, 2).unwrap().edge_count(), 0);
    }

    #[test]
    fn bad_params() {
        assert!(matches!(
            weak_expander(&Graph::new(10), 6, 2, 0),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(
            weak_expander(&Graph::new(10), 2, 3, 0),
            Err(Error::BadParams(_))
        ));
        assert_eq!(
            strong_greedy_kl(&Graph::path(4), 1, 2).unwrap_err(),
            Error::DegreeTooLow {
                ell: 2,
                vertices: vec![0, 3]
            }
        );
    }

    #[test]
    fn empty_500_vertices() {
        for seed in 0..3 {
            let out = weak_expander_detailed(&Graph::new(500), 8, 2, seed, None).unwrap();
            assert!(is_kl_anonymous(&out.plan.result, params(8, 2)));
            assert_eq!(out.k_prime, 0);
            assert!(out.plan.added_degrees().into_iter().max().unwrap() <= 16);
        }
    }

    #[test]
    fn links_are_regular_before_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (m, d) in [(10, 3), (11, 3), (40, 4), (2, 1)] {
            let links = regular_links(m, d, &mut rng);
            let mut deg = vec![0; m];
            for &(a, b) in &links {
                assert_ne!(a, b);
                deg[a] += 1;
                deg[b] += 1;
            }
            let extra = if m % 2 == 1 { d } else { 0 };
            assert!(deg[1..].iter().all(|&x| x == d), "m={m} {deg:?}");
            assert_eq!(deg[0], d + extra);
        }
    }

    #[test]
    fn cycle_strong_k1_l2() {
        let c5 = Graph::cycle(5);
        let plan = strong_greedy_kl(&c5, 1, 2).unwrap();
        assert!(is_strong_transformation(&c5, &plan.result, params(1, 2)).unwrap());
        let t = oracle_strong(&c5, 1, 2, OracleOptions::default())
            .unwrap()
            .value()
            .unwrap();
        assert!(plan.edge_count() >= t);
        assert!(plan.edge_count() <= t.pow(2) * 3 + 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn partition_is_valid(n in 2usize..60, size in 1usize..6, seed in any::<u64>()) {
            prop_assume!(n >= size);
            let part = SupernodePartition::random(n, size, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert!(part.is_valid());
            prop_assert_eq!(part.groups.len(), n / size);
        }

        #[test]
        fn expander_output_is_anonymous(n in 12usize..80, q in 0.0f64..0.1, ell in 2usize..4, seed in any::<u64>()) {
            let g = random_graph(n, q, seed);
            let k = (ell + 2).min(n / 2);
            let out = weak_expander_detailed(&g, k, ell, seed, None).unwrap();
            prop_assert!(is_kl_anonymous(&out.plan.result, params(k, ell)));
            prop_assert!(out.partition.is_valid());
        }

        #[test]
        fn strong_groups_share_an_endpoint(n in 5usize..11, q in 0.3f64..0.7, seed in any::<u64>()) {
            let g = random_graph(n, q, seed);
            let p = params(2, 2);
            prop_assume!(strong_feasible(&g, p).is_ok());
            let plan = strong_greedy_kl(&g, 2, 2).unwrap();
            prop_assert!(is_strong_transformation(&g, &plan.result, p).unwrap());
            for step in &plan.trace {
                prop_assert!(step.edges.len() <= 2 && !step.edges.is_empty());
                prop_assert!(step.residual_after < step.residual_before);
                if let [(a, b), (c, d)] = step.edges[..] {
                    prop_assert!(a == c || a == d || b == c || b == d);
                }
            }
        }

        #[test]
        fn expander_is_deterministic(seed in any::<u64>()) {
            let g = random_graph(40, 0.05, seed);
            prop_assert_eq!(weak_expander(&g, 5, 2, seed).unwrap(), weak_expander(&g, 5, 2, seed).unwrap());
        }
    }
}
