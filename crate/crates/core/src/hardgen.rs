//! Instance generators: seeded random graphs, exhaustive small-graph
//! enumeration, 1-in-3 satisfiability normalization, and the reduction graph
//! that lifts a normalized 1-in-3 instance to a (k,1)-anonymous graph whose
//! (k+1,1) completion cost encodes satisfiability.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};

/// G(n, p): every pair is an edge independently with probability `edge_prob`.
pub fn random_graph(n: usize, edge_prob: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < edge_prob {
                g.insert_unchecked(u, v);
            }
        }
    }
    g
}

/// `K_k` on `0..k` plus a separate edge between `k` and `k + 1`.
///
/// The clique is (k-1,1)-anonymous while the edge endpoints have no sharers.
pub fn clique_with_edge(k: usize) -> Graph {
    let mut g = Graph::complete(k).disjoint_union(&Graph::new(2));
    g.insert_unchecked(k, k + 1);
    g
}

/// Every graph on exactly `n` vertices, one representative per isomorphism class.
///
/// Built by vertex extension with canonical-form deduplication; intended for
/// `n <= 8`.
pub fn nonisomorphic_graphs(n: usize) -> Vec<Graph> {
    let mut level: Vec<Graph> = vec![Graph::new(0)];
    for size in 1..=n {
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        let mut next = Vec::new();
        for g in &level {
            for mask in 0u32..(1 << (size - 1)) {
                let mut h = g.disjoint_union(&Graph::new(1));
                for u in 0..size - 1 {
                    if mask & (1 << u) != 0 {
                        h.insert_unchecked(u, size - 1);
                    }
                }
                if seen.insert(canonical_code(&h)) {
                    next.push(h);
                }
            }
        }
        level = next;
    }
    level.sort_by_key(|g| (g.edge_count(), canonical_code(g)));
    level
        .into_iter()
        .map(|g| {
            // Relabel to the canonical order so output is independent of insertion history.
            let perm = canonical_perm(&g);
            g.permuted(&perm)
        })
        .collect()
}

fn vertex_invariant(g: &Graph, v: Vertex) -> (usize, Vec<usize>) {
    let mut nd: Vec<usize> = g.neighbors(v).iter().map(|&w| g.degree(w)).collect();
    nd.sort_unstable();
    (g.degree(v), nd)
}

fn code_under(g: &Graph, order: &[Vertex]) -> Vec<u64> {
    // order[i] is the vertex placed at position i.
    let n = order.len();
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut rows = vec![0u64; n];
    for (u, v) in g.edges() {
        rows[pos[u]] |= 1 << pos[v];
        rows[pos[v]] |= 1 << pos[u];
    }
    rows
}

/// Best vertex order (lexicographically smallest adjacency rows) among orders
/// that respect the degree-based invariant classes.
fn canonical_order(g: &Graph) -> Vec<Vertex> {
    let n = g.vertex_count();
    let mut classes: BTreeMap<(usize, Vec<usize>), Vec<Vertex>> = BTreeMap::new();
    for v in 0..n {
        classes.entry(vertex_invariant(g, v)).or_default().push(v);
    }
    let blocks: Vec<Vec<Vertex>> = classes.into_values().collect();
    let mut best: Option<(Vec<u64>, Vec<Vertex>)> = None;
    let mut order = Vec::with_capacity(n);
    fn rec(
        g: &Graph,
        blocks: &[Vec<Vertex>],
        bi: usize,
        used: &mut Vec<bool>,
        order: &mut Vec<Vertex>,
        best: &mut Option<(Vec<u64>, Vec<Vertex>)>,
    ) {
        if bi == blocks.len() {
            let code = code_under(g, order);
            if best.as_ref().is_none_or(|(b, _)| code < *b) {
                *best = Some((code, order.clone()));
            }
            return;
        }
        let block = &blocks[bi];
        let placed = block.iter().filter(|&&v| used[v]).count();
        if placed == block.len() {
            rec(g, blocks, bi + 1, used, order, best);
            return;
        }
        for &v in block {
            if !used[v] {
                used[v] = true;
                order.push(v);
                rec(g, blocks, bi, used, order, best);
                order.pop();
                used[v] = false;
            }
        }
    }
    rec(g, &blocks, 0, &mut vec![false; n], &mut order, &mut best);
    best.map(|(_, o)| o).unwrap_or_default()
}

fn canonical_code(g: &Graph) -> Vec<u64> {
    code_under(g, &canonical_order(g))
}

fn canonical_perm(g: &Graph) -> Vec<Vertex> {
    let order = canonical_order(g);
    let mut perm = vec![0; order.len()];
    for (i, &v) in order.iter().enumerate() {
        perm[v] = i;
    }
    perm
}

/// A 1-in-3 satisfiability instance: assign booleans so every triple holds exactly one `true`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OneInThreeInstance {
    pub variables: usize,
    pub triples: Vec<[usize; 3]>,
}

impl OneInThreeInstance {
    pub fn new(variables: usize, triples: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(t) = triples.iter().find(|t| t.iter().any(|&x| x >= variables)) {
            return Err(Error::BadParams(format!(
                "triple {t:?} names a variable >= {variables}"
            )));
        }
        Ok(OneInThreeInstance { variables, triples })
    }

    pub fn occurrences(&self) -> Vec<usize> {
        let mut occ = vec![0; self.variables];
        for t in &self.triples {
            for &x in t {
                occ[x] += 1;
            }
        }
        occ
    }

    /// Every variable in exactly 3 triples, no two triples sharing more than
    /// one variable, no repeated variable within a triple, even triple count.
    pub fn is_normalized(&self) -> bool {
        self.normalization_problem().is_none()
    }

    fn normalization_problem(&self) -> Option<String> {
        if !self.triples.len().is_multiple_of(2) {
            return Some(format!("odd triple count {}", self.triples.len()));
        }
        if let Some((x, c)) = self.occurrences().iter().enumerate().find(|(_, &c)| c != 3) {
            return Some(format!("variable {x} occurs {c} times"));
        }
        for (i, a) in self.triples.iter().enumerate() {
            if a[0] == a[1] || a[0] == a[2] || a[1] == a[2] {
                return Some(format!("triple {i} repeats a variable"));
            }
            for (j, b) in self.triples.iter().enumerate().skip(i + 1) {
                let shared = a.iter().filter(|x| b.contains(x)).count();
                if shared > 1 {
                    return Some(format!("triples {i} and {j} share {shared} variables"));
                }
            }
        }
        None
    }

    /// A satisfying assignment, if any, found by backtracking with unit propagation.
    pub fn solve(&self) -> Option<Vec<bool>> {
        let mut occ: Vec<Vec<usize>> = vec![Vec::new(); self.variables];
        for (i, t) in self.triples.iter().enumerate() {
            for &x in t {
                occ[x].push(i);
            }
        }
        let mut assign: Vec<Option<bool>> = vec![None; self.variables];
        if self.search(&occ, &mut assign) {
            Some(assign.into_iter().map(|a| a.unwrap_or(false)).collect())
        } else {
            None
        }
    }

    pub fn is_satisfiable(&self) -> bool {
        self.solve().is_some()
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.triples
            .iter()
            .all(|t| t.iter().filter(|&&x| assignment[x]).count() == 1)
    }

    fn propagate(
        &self,
        occ: &[Vec<usize>],
        assign: &mut [Option<bool>],
        trail: &mut Vec<usize>,
        start: &[usize],
    ) -> bool {
        let mut queue: Vec<usize> = start.to_vec();
        while let Some(x) = queue.pop() {
            for &ti in &occ[x] {
                let t = self.triples[ti];
                // Multiset semantics: a repeated variable counts once per slot.
                let trues = t.iter().filter(|&&y| assign[y] == Some(true)).count();
                let unknown: Vec<usize> = t.iter().copied().filter(|&y| assign[y].is_none()).collect();
                if trues > 1 {
                    return false;
                }
                if trues == 1 {
                    for y in unknown {
                        if assign[y].is_none() {
                            assign[y] = Some(false);
                            trail.push(y);
                            queue.push(y);
                        }
                    }
                } else if unknown.is_empty() {
                    return false;
                } else if unknown.iter().all(|&y| y == unknown[0]) {
                    let y = unknown[0];
                    // Setting y true must give exactly one true slot.
                    if unknown.len() > 1 {
                        return false;
                    }
                    assign[y] = Some(true);
                    trail.push(y);
                    queue.push(y);
                }
            }
        }
        true
    }

    fn search(&self, occ: &[Vec<usize>], assign: &mut Vec<Option<bool>>) -> bool {
        let open = self
            .triples
            .iter()
            .filter(|t| !t.iter().any(|&y| assign[y] == Some(true)))
            .min_by_key(|t| t.iter().filter(|&&y| assign[y].is_none()).count());
        let Some(t) = open.copied() else {
            return true;
        };
        let mut choices: Vec<usize> = t.iter().copied().filter(|&y| assign[y].is_none()).collect();
        choices.dedup();
        for y in choices {
            let mut trail = vec![y];
            assign[y] = Some(true);
            if self.propagate(occ, assign, &mut trail, &[y]) && self.search(occ, assign) {
                return true;
            }
            for z in trail {
                assign[z] = None;
            }
        }
        false
    }
}

/// Rewrites any 1-in-3 instance into an equisatisfiable normalized one.
///
/// Every occurrence gets its own variable and consecutive copies of a
/// variable are tied by the four-triple equality gadget
/// `(x_i,u,v), (x_{i+1},u',v'), (u,u',w), (v,v',w)`. Variables left with one
/// or two occurrences receive free padding triples `(y,z,t)` until they
/// occur three times. Nine copies indexed by `(i,j)` then merge each padding
/// `z` across copies with equal `i` and each `t` across copies with equal
/// `j`, and the result is doubled for an even triple count.
pub fn normalize_instance(raw: &OneInThreeInstance) -> OneInThreeInstance {
    if raw.triples.is_empty() {
        return OneInThreeInstance::default();
    }
    let mut next = 0usize;
    let mut fresh = || {
        next += 1;
        next - 1
    };

    // Occurrence splitting.
    let mut copies: Vec<Vec<usize>> = vec![Vec::new(); raw.variables];
    let mut triples: Vec<[usize; 3]> = Vec::new();
    for t in &raw.triples {
        let mut nt = [0; 3];
        for (slot, &x) in nt.iter_mut().zip(t.iter()) {
            let id = fresh();
            copies[x].push(id);
            *slot = id;
        }
        triples.push(nt);
    }
    // Equality gadgets between consecutive copies.
    for chain in &copies {
        for pair in chain.windows(2) {
            let (u, v, u2, v2, w) = (fresh(), fresh(), fresh(), fresh(), fresh());
            triples.push([pair[0], u, v]);
            triples.push([pair[1], u2, v2]);
            triples.push([u, u2, w]);
            triples.push([v, v2, w]);
        }
    }
    let base_vars = next;
    let mut occ = vec![0usize; base_vars];
    for t in &triples {
        for &x in t {
            occ[x] += 1;
        }
    }
    // Padding: (y, z_p, t_p) for each missing occurrence of y.
    let mut paddings: Vec<usize> = Vec::new();
    for (y, &c) in occ.iter().enumerate() {
        for _ in c..3 {
            paddings.push(y);
        }
    }

    // Nine copies: base variables are per copy; padding z per (pad, i); padding t per (pad, j).
    let per_copy = base_vars;
    let copies_n = 9;
    let z_base = per_copy * copies_n;
    let t_base = z_base + paddings.len() * 3;
    let nine_vars = t_base + paddings.len() * 3;
    let mut nine: Vec<[usize; 3]> = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            let c = i * 3 + j;
            let shift = c * per_copy;
            for t in &triples {
                nine.push([t[0] + shift, t[1] + shift, t[2] + shift]);
            }
            for (pi, &y) in paddings.iter().enumerate() {
                nine.push([y + shift, z_base + pi * 3 + i, t_base + pi * 3 + j]);
            }
        }
    }
    let mut out = nine.clone();
    out.extend(
        nine.iter()
            .map(|t| [t[0] + nine_vars, t[1] + nine_vars, t[2] + nine_vars]),
    );
    OneInThreeInstance {
        variables: 2 * nine_vars,
        triples: out,
    }
}

/// Output of [`reduction_graph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionGraph {
    pub graph: Graph,
    /// `triples / 6`.
    pub m: usize,
    /// Triple vertices, the only vertices short of (k+1,1)-anonymity.
    pub u_vertices: Vec<Vertex>,
    pub k: usize,
}

/// Builds the anonymity-increment instance from a normalized 1-in-3 instance.
///
/// Triple vertices `0..T` come first, then variable vertices, then the
/// attachments. With `k = 6` every triple vertex gets five pendant leaves.
/// For `k > 6` each triple vertex gets `k - 2` leaves plus one connector of
/// degree `k - 5` whose other `k - 6` neighbors lie in a private `K_{k+2}`.
pub fn reduction_graph(inst: &OneInThreeInstance, k: usize) -> Result<ReductionGraph> {
    if k < 6 {
        return Err(Error::BadParams(format!("reduction needs k >= 6, got {k}")));
    }
    if let Some(problem) = inst.normalization_problem() {
        return Err(Error::NotNormalized(problem));
    }
    let t = inst.triples.len();
    if t == 0 || !t.is_multiple_of(6) {
        return Err(Error::BadTripleCount(t));
    }
    let var_base = t;
    let mut edges: Vec<(Vertex, Vertex)> = Vec::new();
    for (i, tr) in inst.triples.iter().enumerate() {
        for &x in tr {
            edges.push((i, var_base + x));
        }
    }
    let mut next = var_base + inst.variables;
    for i in 0..t {
        let leaves = if k == 6 { 5 } else { k - 2 };
        for _ in 0..leaves {
            edges.push((i, next));
            next += 1;
        }
        if k > 6 {
            let connector = next;
            next += 1;
            edges.push((i, connector));
            let clique: Vec<Vertex> = (next..next + k + 2).collect();
            next += k + 2;
            for (a, &x) in clique.iter().enumerate() {
                for &y in &clique[a + 1..] {
                    edges.push((x, y));
                }
            }
            for &c in clique.iter().take(k - 6) {
                edges.push((connector, c));
            }
        }
    }
    let graph = Graph::from_edges(next, edges)?;
    Ok(ReductionGraph {
        graph,
        m: t / 6,
        u_vertices: (0..t).collect(),
        k,
    })
}

/// Samples a normalized instance with `6m` triples and `6m` variables: a random
/// cubic bipartite incidence structure without 4-cycles. Needs `m >= 2`.
pub fn random_normalized_instance(m: usize, seed: u64) -> Result<OneInThreeInstance> {
    if m < 2 {
        // A cubic bipartite graph without 4-cycles has at least 14 vertices.
        return Err(Error::BadParams(format!(
            "no normalized instance has {} triples",
            6 * m
        )));
    }
    let t = 6 * m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut slots: Vec<usize> = (0..3 * t).map(|s| s / 3).collect();
        slots.shuffle(&mut rng);
        let triples: Vec<[usize; 3]> = slots.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
        let inst = OneInThreeInstance { variables: t, triples };
        if inst.is_normalized() {
            return Ok(inst);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::sharer_count;

    #[test]
    fn random_graph_extremes_and_determinism() {
        assert_eq!(random_graph(8, 0.0, 1).edge_count(), 0);
        assert_eq!(random_graph(8, 1.0, 1), Graph::complete(8));
        assert_eq!(random_graph(10, 0.3, 7), random_graph(10, 0.3, 7));
    }

    #[test]
    fn graph_counts_match_known_sequence() {
        let counts: Vec<usize> = (1..=6).map(|n| nonisomorphic_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 4, 11, 34, 156]);
    }

    #[test]
    fn normalize_single_triple() {
        let raw = OneInThreeInstance::new(3, vec![[0, 1, 2]]).unwrap();
        let norm = normalize_instance(&raw);
        assert!(norm.is_normalized(), "{:?}", norm.normalization_problem());
        assert!(norm.is_satisfiable());
        assert_eq!(
            normalize_instance(&OneInThreeInstance::default()),
            OneInThreeInstance::default()
        );
    }

    #[test]
    fn normalize_repeated_variable() {
        let raw = OneInThreeInstance::new(3, vec![[0, 1, 2], [0, 1, 1]]).unwrap();
        let norm = normalize_instance(&raw);
        assert!(norm.occurrences().iter().all(|&c| c == 3));
        assert!(norm.is_normalized());
        // (0,1,1) forces x0 = 1 and x1 = 0, then (0,1,2) forces x2 = 0.
        assert!(raw.is_satisfiable());
        assert!(norm.is_satisfiable());
    }

    #[test]
    fn normalize_preserves_unsatisfiability() {
        // x in both (x,x,y) and (x,y,y): first forces x=0,y=1; second forces x=1.
        let raw = OneInThreeInstance::new(2, vec![[0, 0, 1], [0, 1, 1]]).unwrap();
        assert!(!raw.is_satisfiable());
        let norm = normalize_instance(&raw);
        assert!(norm.is_normalized());
        assert!(!norm.is_satisfiable());
    }

    #[test]
    fn small_instances_cannot_be_normalized() {
        assert!(random_normalized_instance(1, 0).is_err());
        let inst = random_normalized_instance(2, 3).unwrap();
        assert!(inst.is_normalized());
        assert_eq!(inst.triples.len(), 12);
    }

    #[test]
    fn reduction_profile() {
        let inst = random_normalized_instance(2, 5).unwrap();
        for k in [6, 7, 8] {
            let red = reduction_graph(&inst, k).unwrap();
            assert_eq!(red.m, 2);
            let g = &red.graph;
            for v in g.vertices() {
                let c = sharer_count(g, v, 1);
                if red.u_vertices.contains(&v) {
                    assert_eq!(c, k, "triple vertex {v} with k={k}");
                } else {
                    assert!(c > k, "vertex {v} has {c} sharers with k={k}");
                }
            }
        }
    }

    #[test]
    fn reduction_rejects_bad_input() {
        let raw = OneInThreeInstance::new(3, vec![[0, 1, 2]]).unwrap();
        assert!(matches!(reduction_graph(&raw, 6), Err(Error::NotNormalized(_))));
        let norm = normalize_instance(&raw);
        // Nine copies doubled: always a multiple of 6.
        assert_eq!(norm.triples.len() % 6, 0);
        assert!(reduction_graph(&norm, 6).is_ok());
    }
}
