//! Extremality of couplings in the transportation polytope.
//!
//! A coupling is extremal exactly when its support is a forest as a
//! bipartite graph. The rank criterion checks the same property from the
//! linear-algebra side: the map `(a, b) -> a_i + b_j` onto functions on the
//! support is surjective iff the support has no cycle.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::measure::{Coupling, ToleranceConfig};
use crate::registry::Registry;
use crate::scalar::Scalar;

/// Cells of the grid regarded as edges between row `i` and column `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SupportGraph {
    m: usize,
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl SupportGraph {
    pub fn new(m: usize, n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut edges: Vec<(usize, usize)> = edges.into_iter().collect();
        if let Some(&(i, j)) = edges.iter().find(|&&(i, j)| i >= m || j >= n) {
            return Err(Error::InvalidInput(format!("edge ({i}, {j}) outside the {m}x{n} grid")));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self { m, n, edges })
    }

    /// The support of a bitmask over row-major cells.
    pub fn from_mask(m: usize, n: usize, mask: u64) -> Self {
        let edges = (0..m * n).filter(|c| mask & (1 << c) != 0).map(|c| (c / n, c % n)).collect();
        Self { m, n, edges }
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.binary_search(&(i, j)).is_ok()
    }

    pub fn row_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.m];
        self.edges.iter().for_each(|&(i, _)| deg[i] += 1);
        deg
    }

    pub fn col_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        self.edges.iter().for_each(|&(_, j)| deg[j] += 1);
        deg
    }

    /// Adjacency over nodes `0..m` (rows) and `m..m+n` (columns), sorted.
    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for &(i, j) in &self.edges {
            adj[i].push(self.m + j);
            adj[self.m + j].push(i);
        }
        adj.iter_mut().for_each(|a| a.sort_unstable());
        adj
    }

    /// Number of connected components, isolated nodes included.
    pub fn components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.m + self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut count = self.m + self.n;
        for &(i, j) in &self.edges {
            let (a, b) = (find(&mut parent, i), find(&mut parent, self.m + j));
            if a != b {
                parent[a] = b;
                count -= 1;
            }
        }
        count
    }
}

/// Edges of `gamma` carrying more than `eps_mass`.
pub fn support_graph<T: Scalar>(gamma: &Coupling<T>, tol: &ToleranceConfig) -> SupportGraph {
    let eps = T::tolerance(tol.eps_mass);
    SupportGraph {
        m: gamma.rows(),
        n: gamma.cols(),
        edges: gamma.entries().iter().filter(|e| e.2 > eps).map(|e| (e.0, e.1)).collect(),
    }
}

/// An alternating closed walk through `k >= 2` distinct rows and columns:
/// `(i1,j1), (i1,j2), (i2,j2), ..., (ik,jk), (ik,j1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleWitness {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl CycleWitness {
    /// The `2k` edges in walk order. Even positions carry `+`, odd `-`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let k = self.rows.len();
        (0..k)
            .flat_map(|t| [(self.rows[t], self.cols[t]), (self.rows[t], self.cols[(t + 1) % k])])
            .collect()
    }

    pub fn len(&self) -> usize {
        2 * self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rebuilds a witness from its edge list, checking the alternation.
    pub fn from_edges(edges: &[(usize, usize)]) -> Result<Self> {
        if edges.len() < 4 || !edges.len().is_multiple_of(2) {
            let edge = edges.first().copied().unwrap_or((0, 0));
            return Err(Error::InvalidCycle {
                edge,
                reason: "a cycle needs an even number of at least four edges",
            });
        }
        let k = edges.len() / 2;
        let rows: Vec<usize> = (0..k).map(|t| edges[2 * t].0).collect();
        let cols: Vec<usize> = (0..k).map(|t| edges[2 * t].1).collect();
        let witness = Self { rows, cols };
        if let Some((pos, _)) = witness.edges().iter().zip(edges).enumerate().find(|(_, (a, b))| a != b) {
            return Err(Error::InvalidCycle {
                edge: edges[pos],
                reason: "edges do not alternate between shared rows and columns",
            });
        }
        Ok(witness)
    }

    fn check_shape(&self, m: usize, n: usize) -> Result<()> {
        let k = self.rows.len();
        if k < 2 || self.cols.len() != k {
            return Err(Error::InvalidCycle {
                edge: (self.rows.first().copied().unwrap_or(0), self.cols.first().copied().unwrap_or(0)),
                reason: "a cycle needs at least two rows and as many columns",
            });
        }
        for (t, (i, j)) in self.edges().into_iter().enumerate() {
            let bad = |reason| Err(Error::InvalidCycle { edge: (i, j), reason });
            if i >= m || j >= n {
                return bad("edge outside the grid");
            }
            if self.rows[..t / 2].contains(&i) {
                return bad("row repeated");
            }
            if t % 2 == 0 && self.cols[..t / 2].contains(&j) {
                return bad("column repeated");
            }
        }
        Ok(())
    }
}

/// Forest test by depth-first search. On failure returns the fundamental
/// cycle of the first back edge met in canonical edge order.
pub fn is_acyclic(s: &SupportGraph) -> (bool, Option<CycleWitness>) {
    let m = s.m;
    let adj = s.adjacency();
    let nodes = adj.len();
    let mut parent = vec![usize::MAX; nodes];
    let mut visited = vec![false; nodes];
    let mut on_stack = vec![false; nodes];

    for start in 0..nodes {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        on_stack[start] = true;
        let mut stack = vec![(start, 0usize)];
        while let Some(top) = stack.last_mut() {
            let (u, idx) = *top;
            if idx == adj[u].len() {
                on_stack[u] = false;
                stack.pop();
                continue;
            }
            top.1 += 1;
            let v = adj[u][idx];
            if v == parent[u] {
                continue;
            }
            if !visited[v] {
                visited[v] = true;
                on_stack[v] = true;
                parent[v] = u;
                stack.push((v, 0));
            } else if on_stack[v] {
                let mut walk = vec![u];
                let mut x = u;
                while x != v {
                    x = parent[x];
                    walk.push(x);
                }
                return (false, Some(witness_from_walk(&walk, m)));
            }
        }
    }
    (true, None)
}

/// `walk` lists the nodes of a cycle in order; consecutive nodes (and the
/// last and first) are adjacent.
fn witness_from_walk(walk: &[usize], m: usize) -> CycleWitness {
    let len = walk.len();
    let shift = walk.iter().position(|&u| u < m).expect("a bipartite cycle has rows");
    let a: Vec<usize> = (0..len).map(|t| walk[(t + shift) % len]).collect();
    let k = len / 2;
    CycleWitness {
        rows: (0..k).map(|t| a[2 * t]).collect(),
        cols: (0..k).map(|t| a[(2 * t + len - 1) % len] - m).collect(),
    }
}

/// Rank of the `|S| x (m+n)` evaluation matrix with `1` at columns `i`
/// and `m + j` in the row of edge `(i, j)`.
fn evaluation_matrix(s: &SupportGraph) -> Vec<Vec<i64>> {
    s.edges
        .iter()
        .map(|&(i, j)| {
            let mut row = vec![0; s.m + s.n];
            row[i] = 1;
            row[s.m + j] = 1;
            row
        })
        .collect()
}

/// Fraction-free (Bareiss) elimination over the integers.
pub fn rank_exact(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
    let (h, w) = (a.len(), a.first().map_or(0, Vec::len));
    let mut rank = 0;
    let mut prev = BigInt::from(1);
    for col in 0..w {
        if rank == h {
            break;
        }
        let Some(p) = (rank..h).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for r in rank + 1..h {
            for c in col + 1..w {
                let v = (&a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c]) / &prev;
                a[r][c] = v;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Gaussian elimination with partial pivoting; pivots below `threshold` count as zero.
pub fn rank_float(rows: &[Vec<f64>], threshold: f64) -> usize {
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let (h, w) = (a.len(), a.first().map_or(0, Vec::len));
    let mut rank = 0;
    for col in 0..w {
        if rank == h {
            break;
        }
        let (p, best) = (rank..h)
            .map(|r| (r, a[r][col].abs()))
            .fold((rank, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= threshold {
            continue;
        }
        a.swap(rank, p);
        let (top, below) = a.split_at_mut(rank + 1);
        let pivot = &top[rank];
        for row in below.iter_mut().take(h - rank - 1) {
            let factor = row[col] / pivot[col];
            if factor != 0.0 {
                for (x, p) in row[col..w].iter_mut().zip(&pivot[col..w]) {
                    *x -= factor * p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank criterion on the support: full row rank `|S|` of the evaluation matrix.
#[derive(Debug, Clone, Copy)]
pub struct DlRank {
    pub exact: bool,
    /// Largest support accepted.
    pub cap: usize,
}

impl Default for DlRank {
    fn default() -> Self {
        Self { exact: false, cap: 4096 }
    }
}

impl DlRank {
    pub fn rank(&self, s: &SupportGraph) -> Result<usize> {
        if s.len() > self.cap {
            return Err(Error::TooLarge {
                what: "support size",
                size: s.len(),
                limit: self.cap,
            });
        }
        let mat = evaluation_matrix(s);
        Ok(if self.exact {
            rank_exact(&mat)
        } else {
            let mat: Vec<Vec<f64>> = mat.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
            rank_float(&mat, 1e-9)
        })
    }
}

/// Rank test on the support of `gamma`, exact for exact backends.
pub fn dl_rank_test<T: Scalar>(gamma: &Coupling<T>, tol: &ToleranceConfig) -> Result<bool> {
    let s = support_graph(gamma, tol);
    let rank = DlRank {
        exact: T::EXACT,
        ..DlRank::default()
    }
    .rank(&s)?;
    Ok(rank == s.len())
}

/// Perturbs `gamma` by `+-eps` around the cycle, `eps` the least mass on it.
pub fn split_witness<T: Scalar>(gamma: &Coupling<T>, cycle: &CycleWitness) -> Result<(Coupling<T>, Coupling<T>)> {
    let (m, n) = gamma.shape();
    cycle.check_shape(m, n)?;
    let edges = cycle.edges();
    let mut masses = Vec::with_capacity(edges.len());
    for &(i, j) in &edges {
        let mass = gamma.mass(i, j);
        if mass <= T::zero() {
            return Err(Error::InvalidCycle {
                edge: (i, j),
                reason: "edge carries no mass",
            });
        }
        masses.push(mass);
    }
    let eps = masses.iter().cloned().reduce(T::min_val).expect("non-empty cycle");
    let shift = |sign: bool| {
        let mut dense = gamma.to_dense();
        for (t, &(i, j)) in edges.iter().enumerate() {
            let slot = &mut dense[i * n + j];
            *slot = if (t % 2 == 0) == sign {
                slot.clone() + eps.clone()
            } else {
                slot.clone() - eps.clone()
            };
        }
        Coupling::from_dense(m, n, &dense)
    };
    Ok((shift(true)?, shift(false)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Extremal,
    NonExtremal,
}

#[derive(Debug, Clone)]
pub struct ExtremalityCertificate<T> {
    pub verdict: Verdict,
    pub cycle: Option<CycleWitness>,
    pub split: Option<(Coupling<T>, Coupling<T>)>,
}

impl<T> ExtremalityCertificate<T> {
    pub fn is_extremal(&self) -> bool {
        self.verdict == Verdict::Extremal
    }
}

/// Decides extremality from the support; non-extremal verdicts carry a
/// cycle and the two couplings it splits `gamma` into.
pub fn is_extremal<T: Scalar>(gamma: &Coupling<T>, tol: &ToleranceConfig) -> ExtremalityCertificate<T> {
    match is_acyclic(&support_graph(gamma, tol)) {
        (true, _) => ExtremalityCertificate {
            verdict: Verdict::Extremal,
            cycle: None,
            split: None,
        },
        (false, cycle) => {
            let cycle = cycle.expect("cyclic verdict carries a witness");
            let split = split_witness(gamma, &cycle).expect("support cycles carry positive mass");
            ExtremalityCertificate {
                verdict: Verdict::NonExtremal,
                cycle: Some(cycle),
                split: Some(split),
            }
        }
    }
}

/// A yes/no test for extremality of couplings with a given support.
pub trait ExtremalityCriterion: Send + Sync {
    fn name(&self) -> &'static str;
    fn is_extremal_support(&self, s: &SupportGraph) -> Result<bool>;
}

pub struct Acyclicity;

impl ExtremalityCriterion for Acyclicity {
    fn name(&self) -> &'static str {
        "acyclic"
    }

    fn is_extremal_support(&self, s: &SupportGraph) -> Result<bool> {
        Ok(is_acyclic(s).0)
    }
}

impl ExtremalityCriterion for DlRank {
    fn name(&self) -> &'static str {
        if self.exact {
            "dl-rank-exact"
        } else {
            "dl-rank"
        }
    }

    fn is_extremal_support(&self, s: &SupportGraph) -> Result<bool> {
        Ok(self.rank(s)? == s.len())
    }
}

pub fn criteria() -> Registry<dyn ExtremalityCriterion> {
    let mut reg: Registry<dyn ExtremalityCriterion> = Registry::new("extremality criterion");
    reg.register("acyclic", Box::new(Acyclicity));
    reg.register("dl-rank", Box::new(DlRank::default()));
    reg.register(
        "dl-rank-exact",
        Box::new(DlRank {
            exact: true,
            ..DlRank::default()
        }),
    );
    reg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{marginals_of, tv_distance, validate_coupling};
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn uniform_2x2() -> Coupling<Rational> {
        Coupling::from_entries(2, 2, [(0, 0, r(1, 4)), (0, 1, r(1, 4)), (1, 0, r(1, 4)), (1, 1, r(1, 4))]).unwrap()
    }

    #[test]
    fn support_graph_filters_dust() {
        let tol = ToleranceConfig::default();
        let g = Coupling::from_entries(2, 2, [(0, 0, 0.5), (1, 1, 0.5), (0, 1, 1e-15)]).unwrap();
        assert_eq!(support_graph(&g, &tol).edges(), &[(0, 0), (1, 1)]);
        assert!(support_graph(&Coupling::<f64>::empty(2, 2), &tol).is_empty());
    }

    #[test]
    fn permutation_support_is_acyclic() {
        let s = SupportGraph::new(3, 3, [(0, 2), (1, 0), (2, 1)]).unwrap();
        assert_eq!(is_acyclic(&s), (true, None));
    }

    #[test]
    fn full_two_by_two_is_a_four_cycle() {
        let s = SupportGraph::new(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        let (ok, w) = is_acyclic(&s);
        assert!(!ok);
        let w = w.unwrap();
        assert_eq!(w.len(), 4);
        let mut edges = w.edges();
        edges.sort();
        assert_eq!(edges, s.edges());
    }

    #[test]
    fn witness_edges_alternate() {
        // 6-cycle x0-y0-x1-y1-x2-y2-x0 plus a pendant edge
        let s = SupportGraph::new(3, 4, [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (0, 2), (2, 3)]).unwrap();
        let w = is_acyclic(&s).1.unwrap();
        assert_eq!(w.rows.len(), 3);
        for &(i, j) in &w.edges() {
            assert!(s.contains(i, j));
        }
        assert_eq!(CycleWitness::from_edges(&w.edges()).unwrap(), w);
    }

    #[test]
    fn rank_examples() {
        let tol = ToleranceConfig::default();
        let diag = Coupling::from_entries(3, 3, (0..3).map(|i| (i, i, r(1, 3)))).unwrap();
        assert!(dl_rank_test(&diag, &tol).unwrap());
        assert!(!dl_rank_test(&uniform_2x2(), &tol).unwrap());
        assert_eq!(DlRank::default().rank(&support_graph(&uniform_2x2(), &tol)).unwrap(), 3);
        assert!(dl_rank_test(&Coupling::<Rational>::empty(2, 2), &tol).unwrap());
        let capped = DlRank { exact: true, cap: 2 };
        assert!(capped.rank(&support_graph(&diag, &tol)).is_err());
    }

    #[test]
    fn rank_exact_matches_float_on_small_matrices() {
        let m = vec![vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]];
        assert_eq!(rank_exact(&m), 2);
        let f: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        assert_eq!(rank_float(&f, 1e-9), 2);
    }

    #[test]
    fn uniform_split_gives_permutations() {
        let tol = ToleranceConfig::default();
        let g = uniform_2x2();
        let cert = is_extremal(&g, &tol);
        assert_eq!(cert.verdict, Verdict::NonExtremal);
        let (a, b) = cert.split.unwrap();
        let diag = Coupling::from_entries(2, 2, [(0, 0, r(1, 2)), (1, 1, r(1, 2))]).unwrap();
        let anti = Coupling::from_entries(2, 2, [(0, 1, r(1, 2)), (1, 0, r(1, 2))]).unwrap();
        assert!((a == diag && b == anti) || (a == anti && b == diag));
        assert_eq!(a.plus(&b).unwrap().scaled(&r(1, 2)).unwrap(), g);
    }

    #[test]
    fn split_distance_is_twice_eps_per_edge() {
        let tol = ToleranceConfig::default();
        let g = Coupling::from_entries(
            2,
            3,
            [(0, 0, r(1, 10)), (0, 1, r(2, 10)), (1, 0, r(3, 10)), (1, 1, r(1, 20)), (1, 2, r(7, 20))],
        )
        .unwrap();
        let cert = is_extremal(&g, &tol);
        let cycle = cert.cycle.unwrap();
        let (a, b) = cert.split.unwrap();
        let eps = r(1, 20);
        assert_eq!(tv_distance(&a, &b).unwrap(), r(2 * cycle.len() as i64, 1) * eps);
        let (mu, nu) = marginals_of(&g);
        assert!(validate_coupling(&a, &mu, &nu, &tol).unwrap());
        assert!(validate_coupling(&b, &mu, &nu, &tol).unwrap());
        // reversing the walk swaps the pair
        let reversed = CycleWitness {
            rows: cycle.rows.iter().rev().copied().collect(),
            cols: {
                let k = cycle.cols.len();
                (0..k).map(|t| cycle.cols[(k - t) % k]).collect()
            },
        };
        let (a2, b2) = split_witness(&g, &reversed).unwrap();
        assert_eq!((a2, b2), (b, a));
    }

    #[test]
    fn split_rejects_bad_cycles() {
        let g = Coupling::from_entries(2, 2, [(0, 0, r(1, 2)), (1, 1, r(1, 2))]).unwrap();
        let w = CycleWitness {
            rows: vec![0, 1],
            cols: vec![0, 1],
        };
        match split_witness(&g, &w) {
            Err(Error::InvalidCycle { edge, .. }) => assert_eq!(edge, (0, 1)),
            other => panic!("expected InvalidCycle, got {other:?}"),
        }
        let repeated = CycleWitness {
            rows: vec![0, 0],
            cols: vec![0, 1],
        };
        assert!(split_witness(&uniform_2x2(), &repeated).is_err());
    }

    #[test]
    fn criteria_registry() {
        let reg = criteria();
        let s = SupportGraph::new(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        for (name, c) in reg.iter() {
            assert_eq!(c.name(), name);
            assert!(!c.is_extremal_support(&s).unwrap());
        }
    }
}
