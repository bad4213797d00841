//! (k,ℓ)-anonymity checking, residual anonymity, and strong-transformation tests.
//!
//! A vertex `u` is a *sharer* of `v` when `u ≠ v` and the two have at least ℓ
//! common neighbors. A graph is (k,ℓ)-anonymous when every vertex has at least
//! `k` sharers. In the strong setting sharing is measured between the original
//! neighborhood of `v` and the transformed neighborhood of `u`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex, VertexSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AnonParams {
    pub k: usize,
    pub ell: usize,
}

impl AnonParams {
    pub fn new(k: usize, ell: usize) -> Result<Self> {
        if k == 0 || ell == 0 {
            return Err(Error::BadParams(format!(
                "k and ell must be positive (k={k}, ell={ell})"
            )));
        }
        Ok(AnonParams { k, ell })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Weak,
    Strong,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Weak => "weak",
            Mode::Strong => "strong",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weak" => Ok(Mode::Weak),
            "strong" => Ok(Mode::Strong),
            other => Err(Error::BadParams(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualReport {
    /// `k'(v)`: number of sharers of each vertex, uncapped.
    pub sharer_count: Vec<usize>,
    /// `r(v) = max(k - k'(v), 0)`.
    pub residual: Vec<usize>,
    /// `R = Σ r(v)`.
    pub total: usize,
    /// Vertices with `r(v) > 0`, ascending.
    pub deficient: Vec<Vertex>,
}

impl ResidualReport {
    fn from_counts(sharer_count: Vec<usize>, k: usize) -> Self {
        let residual: Vec<usize> = sharer_count.iter().map(|&c| k.saturating_sub(c)).collect();
        let total = residual.iter().sum();
        let deficient = residual
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > 0)
            .map(|(v, _)| v)
            .collect();
        ResidualReport {
            sharer_count,
            residual,
            total,
            deficient,
        }
    }
}

/// Scratch space for counting shared neighbors from one source vertex.
#[derive(Debug, Clone, Default)]
pub(crate) struct ShareCounter {
    counts: Vec<u32>,
    touched: Vec<Vertex>,
}

impl ShareCounter {
    pub(crate) fn new(n: usize) -> Self {
        ShareCounter {
            counts: vec![0; n],
            touched: Vec::new(),
        }
    }

    /// Counts, for every `u ≠ v`, `|base_nbrs(v) ∩ N_other(u)|`, then calls
    /// `f(u, count)` for each `u` with a nonzero count.
    fn scan(&mut self, base: &Graph, other: &Graph, v: Vertex, mut f: impl FnMut(Vertex, usize)) {
        if self.counts.len() < other.vertex_count() {
            self.counts.resize(other.vertex_count(), 0);
        }
        for &w in base.neighbors(v) {
            for &u in other.neighbors(w) {
                if u != v {
                    if self.counts[u] == 0 {
                        self.touched.push(u);
                    }
                    self.counts[u] += 1;
                }
            }
        }
        for &u in &self.touched {
            f(u, self.counts[u] as usize);
            self.counts[u] = 0;
        }
        self.touched.clear();
    }

    pub(crate) fn count(&mut self, base: &Graph, other: &Graph, v: Vertex, ell: usize) -> usize {
        let mut n = 0;
        self.scan(base, other, v, |_, c| {
            if c >= ell {
                n += 1;
            }
        });
        n
    }

    pub(crate) fn collect(&mut self, base: &Graph, other: &Graph, v: Vertex, ell: usize) -> VertexSet {
        let mut out = VertexSet::new();
        self.scan(base, other, v, |u, c| {
            if c >= ell {
                out.insert(u);
            }
        });
        out
    }
}

/// `{ u ≠ v : |N(u) ∩ N(v)| ≥ ell }`.
pub fn sharers(g: &Graph, v: Vertex, ell: usize) -> VertexSet {
    ShareCounter::new(g.vertex_count()).collect(g, g, v, ell)
}

pub fn sharer_count(g: &Graph, v: Vertex, ell: usize) -> usize {
    ShareCounter::new(g.vertex_count()).count(g, g, v, ell)
}

pub fn is_kl_anonymous(g: &Graph, p: AnonParams) -> bool {
    let mut counter = ShareCounter::new(g.vertex_count());
    g.vertices().all(|v| counter.count(g, g, v, p.ell) >= p.k)
}

pub fn residual(g: &Graph, p: AnonParams) -> ResidualReport {
    let mut counter = ShareCounter::new(g.vertex_count());
    let counts = g.vertices().map(|v| counter.count(g, g, v, p.ell)).collect();
    ResidualReport::from_counts(counts, p.k)
}

fn check_superset(g: &Graph, g_prime: &Graph) -> Result<()> {
    if g.vertex_count() != g_prime.vertex_count() {
        return Err(Error::SizeMismatch(g.vertex_count(), g_prime.vertex_count()));
    }
    match g.edges().find(|&(u, v)| !g_prime.has_edge(u, v)) {
        Some((u, v)) => Err(Error::NotSuperset(u, v)),
        None => Ok(()),
    }
}

/// `{ u ≠ v : |N_G(v) ∩ N_G'(u)| ≥ ell }`.
pub fn strong_sharers(g: &Graph, g_prime: &Graph, v: Vertex, ell: usize) -> VertexSet {
    ShareCounter::new(g_prime.vertex_count()).collect(g, g_prime, v, ell)
}

/// Residual anonymity of `g_prime` measured against the original neighborhoods of `g`.
pub fn strong_residual(g: &Graph, g_prime: &Graph, p: AnonParams) -> Result<ResidualReport> {
    check_superset(g, g_prime)?;
    let mut counter = ShareCounter::new(g.vertex_count());
    let counts = g.vertices().map(|v| counter.count(g, g_prime, v, p.ell)).collect();
    Ok(ResidualReport::from_counts(counts, p.k))
}

pub fn is_strong_transformation(g: &Graph, g_prime: &Graph, p: AnonParams) -> Result<bool> {
    check_superset(g, g_prime)?;
    let mut counter = ShareCounter::new(g.vertex_count());
    Ok(g.vertices().all(|v| counter.count(g, g_prime, v, p.ell) >= p.k))
}

/// Which clause of the (2,1) characterization a vertex satisfies first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag21 {
    Triangle,
    Deg3Neighbor,
    MiddleOf5Path,
    None,
}

/// Tags every vertex with the first (2,1) condition it meets: it lies on a
/// triangle; it is adjacent to a vertex of degree at least 3; or it is the
/// middle of a 5-vertex path. A vertex tagged `None` is exactly a vertex with
/// fewer than two sharers at ℓ = 1.
pub fn check_21_characterization(g: &Graph) -> Vec<Tag21> {
    g.vertices().map(|v| tag_21(g, v)).collect()
}

fn tag_21(g: &Graph, v: Vertex) -> Tag21 {
    let nbrs = g.neighbors(v);
    for (i, &a) in nbrs.iter().enumerate() {
        if nbrs[i + 1..].iter().any(|&b| g.has_edge(a, b)) {
            return Tag21::Triangle;
        }
    }
    if nbrs.iter().any(|&w| g.degree(w) >= 3) {
        return Tag21::Deg3Neighbor;
    }
    // No triangle and all neighbors have degree <= 2: each neighbor contributes
    // at most one far endpoint, and two distinct ones make a 5-path centered at v.
    let mut far: Option<Vertex> = None;
    for &w in nbrs {
        for &x in g.neighbors(w) {
            if x == v {
                continue;
            }
            match far {
                None => far = Some(x),
                Some(y) if y != x => return Tag21::MiddleOf5Path,
                Some(_) => {}
            }
        }
    }
    Tag21::None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(k: usize, ell: usize) -> AnonParams {
        AnonParams::new(k, ell).unwrap()
    }

    /// K_k on 0..k plus the edge (k, k+1).
    fn clique_plus_edge(k: usize) -> Graph {
        let mut g = Graph::complete(k).disjoint_union(&Graph::new(2));
        g.add_edge(k, k + 1).unwrap();
        g
    }

    #[test]
    fn params_validated() {
        assert!(AnonParams::new(0, 1).is_err());
        assert!(AnonParams::new(1, 0).is_err());
        assert_eq!("strong".parse::<Mode>().unwrap(), Mode::Strong);
        assert!("medium".parse::<Mode>().is_err());
    }

    #[test]
    fn sharer_examples() {
        assert_eq!(sharers(&Graph::complete(3), 0, 1), VertexSet::from([1, 2]));
        assert!(sharers(&Graph::path(3), 1, 1).is_empty());
        assert_eq!(sharers(&Graph::complete(5), 0, 3), VertexSet::from([1, 2, 3, 4]));
    }

    #[test]
    fn anonymity_examples() {
        assert!(is_kl_anonymous(&Graph::complete(5), p(4, 3)));
        assert!(!is_kl_anonymous(&Graph::complete(5), p(4, 4)));
        assert!(!is_kl_anonymous(&Graph::path(3), p(2, 1)));
        assert_eq!(sharers(&Graph::path(5), 2, 1), VertexSet::from([0, 4]));
    }

    #[test]
    fn residual_examples() {
        let r = residual(&Graph::path(3), p(2, 1));
        assert_eq!(r.residual, vec![1, 2, 1]);
        assert_eq!(r.total, 4);
        assert_eq!(r.deficient, vec![0, 1, 2]);
        assert_eq!(residual(&Graph::complete(5), p(4, 3)).total, 0);
        assert_eq!(residual(&Graph::new(1), p(1, 1)).total, 1);
    }

    #[test]
    fn strong_transformation_examples() {
        let k5 = Graph::complete(5);
        assert_eq!(is_strong_transformation(&k5, &k5, p(4, 3)), Ok(true));

        for k in 4..=8 {
            let g = clique_plus_edge(k);
            let (x, y) = (k, k + 1);
            let mut weak = g.clone();
            weak.add_edge(x, 0).unwrap();
            weak.add_edge(y, 0).unwrap();
            assert!(is_kl_anonymous(&weak, p(k - 1, 1)));
            assert_eq!(is_strong_transformation(&g, &weak, p(k - 1, 1)), Ok(false));

            let mut strong = g.clone();
            for c in 0..k - 1 {
                strong.add_edge(x, c).unwrap();
                strong.add_edge(y, c).unwrap();
            }
            assert_eq!(is_strong_transformation(&g, &strong, p(k - 1, 1)), Ok(true));
        }
    }

    #[test]
    fn strong_transformation_errors() {
        let g = Graph::path(3);
        assert_eq!(
            is_strong_transformation(&g, &Graph::new(3), p(1, 1)),
            Err(Error::NotSuperset(0, 1))
        );
        assert_eq!(
            is_strong_transformation(&g, &Graph::path(4), p(1, 1)),
            Err(Error::SizeMismatch(3, 4))
        );
    }

    #[test]
    fn characterization_examples() {
        assert_eq!(check_21_characterization(&Graph::complete(3)), vec![Tag21::Triangle; 3]);
        assert_eq!(
            check_21_characterization(&Graph::star(3)),
            vec![
                Tag21::None,
                Tag21::Deg3Neighbor,
                Tag21::Deg3Neighbor,
                Tag21::Deg3Neighbor
            ]
        );
        assert_eq!(check_21_characterization(&Graph::path(5))[2], Tag21::MiddleOf5Path);
        // A 4-cycle has two neighbors with outward edges, but they meet at the same vertex.
        assert_eq!(check_21_characterization(&Graph::cycle(4)), vec![Tag21::None; 4]);
    }
}
