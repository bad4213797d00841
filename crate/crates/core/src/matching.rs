//! Matchings over an explicit list of allowed vertex pairs.
//!
//! [`max_matching`] is Edmonds' blossom algorithm, since the allowed-pair
//! structure is a general graph with odd cycles. [`greedy_matching`] is the
//! seeded linear-time maximal matcher.

use std::collections::{HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{normalize, Edge, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    /// Matched pairs as `(min, max)`, sorted.
    pub pairs: Vec<Edge>,
}

impl Matching {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn mate_of(&self, v: Vertex) -> Option<Vertex> {
        self.pairs.iter().find_map(|&(a, b)| {
            if a == v {
                Some(b)
            } else if b == v {
                Some(a)
            } else {
                None
            }
        })
    }

    fn from_pairs(mut pairs: Vec<Edge>) -> Self {
        for p in pairs.iter_mut() {
            *p = normalize(p.0, p.1);
        }
        pairs.sort_unstable();
        Matching { pairs }
    }
}

/// Compacts the vertex ids and drops pairs that leave `vertices`, self-pairs and duplicates.
fn compact(vertices: &[Vertex], allowed: &[Edge]) -> (Vec<Vertex>, Vec<Vec<usize>>) {
    let mut ids: Vec<Vertex> = vertices.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let index: HashMap<Vertex, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adj = vec![Vec::new(); ids.len()];
    for &(u, v) in allowed {
        if let (Some(&a), Some(&b)) = (index.get(&u), index.get(&v)) {
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    (ids, adj)
}

/// Maximum-cardinality matching on the graph `(vertices, allowed)`.
pub fn max_matching(vertices: &[Vertex], allowed: &[Edge]) -> Matching {
    let (ids, adj) = compact(vertices, allowed);
    let mate = Blossom::new(&adj).solve();
    let pairs = mate
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.filter(|&j| i < j).map(|j| (ids[i], ids[j])))
        .collect();
    Matching::from_pairs(pairs)
}

/// Maximal matching built by scanning the allowed pairs in a seeded random order.
pub fn greedy_matching(vertices: &[Vertex], allowed: &[Edge], seed: u64) -> Matching {
    let mut ids: Vec<Vertex> = vertices.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let mut pairs: Vec<Edge> = allowed
        .iter()
        .map(|&(u, v)| normalize(u, v))
        .filter(|&(u, v)| u != v && ids.binary_search(&u).is_ok() && ids.binary_search(&v).is_ok())
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut used: HashMap<Vertex, ()> = HashMap::new();
    let mut chosen = Vec::new();
    for (u, v) in pairs {
        if !used.contains_key(&u) && !used.contains_key(&v) {
            used.insert(u, ());
            used.insert(v, ());
            chosen.push((u, v));
        }
    }
    Matching::from_pairs(chosen)
}

struct Blossom<'a> {
    adj: &'a [Vec<usize>],
    mate: Vec<Option<usize>>,
    parent: Vec<Option<usize>>,
    base: Vec<usize>,
    in_queue: Vec<bool>,
    queue: VecDeque<usize>,
}

impl<'a> Blossom<'a> {
    fn new(adj: &'a [Vec<usize>]) -> Self {
        let n = adj.len();
        Blossom {
            adj,
            mate: vec![None; n],
            parent: vec![None; n],
            base: (0..n).collect(),
            in_queue: vec![false; n],
            queue: VecDeque::new(),
        }
    }

    fn solve(mut self) -> Vec<Option<usize>> {
        // Greedy warm start; augmentations then fix any suboptimality.
        for v in 0..self.adj.len() {
            if self.mate[v].is_none() {
                if let Some(&u) = self.adj[v].iter().find(|&&u| self.mate[u].is_none()) {
                    self.mate[v] = Some(u);
                    self.mate[u] = Some(v);
                }
            }
        }
        for root in 0..self.adj.len() {
            if self.mate[root].is_none() {
                if let Some(end) = self.find_augmenting_path(root) {
                    self.augment(end);
                }
            }
        }
        self.mate
    }

    fn augment(&mut self, mut v: usize) {
        while let Some(pv) = self.parent[v] {
            let next = self.mate[pv];
            self.mate[v] = Some(pv);
            self.mate[pv] = Some(v);
            match next {
                Some(nv) => v = nv,
                None => break,
            }
        }
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; self.adj.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            match self.mate[a] {
                Some(m) => a = self.parent[m].expect("tree vertex has parent"),
                None => break,
            }
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[self.mate[b].expect("non-root has mate")].expect("tree vertex has parent");
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize, in_blossom: &mut [bool]) {
        while self.base[v] != b {
            let m = self.mate[v].expect("blossom vertex matched");
            in_blossom[self.base[v]] = true;
            in_blossom[self.base[m]] = true;
            self.parent[v] = Some(child);
            child = m;
            v = self.parent[m].expect("tree vertex has parent");
        }
    }

    fn find_augmenting_path(&mut self, root: usize) -> Option<usize> {
        let n = self.adj.len();
        self.parent.iter_mut().for_each(|p| *p = None);
        self.in_queue.iter_mut().for_each(|q| *q = false);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.queue.clear();
        self.queue.push_back(root);
        self.in_queue[root] = true;

        while let Some(v) = self.queue.pop_front() {
            for idx in 0..self.adj[v].len() {
                let to = self.adj[v][idx];
                if self.base[v] == self.base[to] || self.mate[v] == Some(to) {
                    continue;
                }
                let to_is_outer = to == root || self.mate[to].is_some_and(|m| self.parent[m].is_some());
                if to_is_outer {
                    let cur = self.lca(v, to);
                    let mut in_blossom = vec![false; n];
                    self.mark_path(v, cur, to, &mut in_blossom);
                    self.mark_path(to, cur, v, &mut in_blossom);
                    for i in 0..n {
                        if in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.in_queue[i] {
                                self.in_queue[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to].is_none() {
                    self.parent[to] = Some(v);
                    match self.mate[to] {
                        None => return Some(to),
                        Some(m) => {
                            self.in_queue[m] = true;
                            self.queue.push_back(m);
                        }
                    }
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_pairs(n: usize) -> Vec<Edge> {
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect()
    }

    fn assert_valid(m: &Matching, allowed: &[Edge]) {
        let mut used = std::collections::HashSet::new();
        for &(u, v) in &m.pairs {
            assert!(allowed.contains(&(u, v)) || allowed.contains(&(v, u)));
            assert!(used.insert(u) && used.insert(v), "vertex reused in {m:?}");
        }
    }

    #[test]
    fn max_matching_examples() {
        let k4 = all_pairs(4);
        assert_eq!(max_matching(&[0, 1, 2, 3], &k4).len(), 2);
        assert_eq!(max_matching(&[0, 1, 2], &all_pairs(3)).len(), 1);
        let c5 = vec![(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)];
        let m = max_matching(&[0, 1, 2, 3, 4], &c5);
        assert_eq!(m.len(), 2);
        assert_valid(&m, &c5);
    }

    #[test]
    fn blossom_needed() {
        // Triangle 0-1-2 with pendant paths; greedy start 1-2 blocks the optimum.
        let allowed = vec![(0, 1), (1, 2), (0, 2), (2, 3), (0, 4), (4, 5), (3, 6)];
        let m = max_matching(&(0..7).collect::<Vec<_>>(), &allowed);
        assert_eq!(m.len(), 3);
        assert_valid(&m, &allowed);
    }

    #[test]
    fn ignores_pairs_outside_vertex_set() {
        let m = max_matching(&[0, 1], &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(m.pairs, vec![(0, 1)]);
    }

    #[test]
    fn greedy_examples() {
        let path = vec![(0, 1), (1, 2), (2, 3)];
        let m = greedy_matching(&[0, 1, 2, 3], &path, 5);
        assert!(!m.is_empty());
        assert_valid(&m, &path);
        let k6 = all_pairs(6);
        assert_eq!(greedy_matching(&(0..6).collect::<Vec<_>>(), &k6, 11).len(), 3);
        assert!(greedy_matching(&[0, 1], &[], 0).is_empty());
        assert_eq!(
            greedy_matching(&(0..6).collect::<Vec<_>>(), &k6, 3),
            greedy_matching(&(0..6).collect::<Vec<_>>(), &k6, 3)
        );
    }
}
