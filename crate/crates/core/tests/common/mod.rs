//! Seeded generators shared by the integration suites.

#![allow(dead_code)]

use limbsys::extremality::SupportGraph;
use limbsys::{Coupling, CostMatrix, DiscreteMarginal, Rational, Scalar};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(num: i64, den: i64) -> Rational {
    Rational::from_ratio(num, den)
}

/// Positive integer weights `1..=max` normalized to total one.
pub fn probability(rng: &mut ChaCha8Rng, len: usize, max: i64) -> DiscreteMarginal<Rational> {
    let raw: Vec<i64> = (0..len).map(|_| rng.gen_range(1..=max)).collect();
    let total: i64 = raw.iter().sum();
    DiscreteMarginal::new(raw.into_iter().map(|w| q(w, total)).collect()).unwrap()
}

/// Integer costs in `0..=max`.
pub fn integer_cost(rng: &mut ChaCha8Rng, m: usize, n: usize, max: i64) -> CostMatrix<Rational> {
    CostMatrix::from_fn(m, n, |_, _| q(rng.gen_range(0..=max), 1)).unwrap()
}

/// A uniformly shuffled spanning tree of `K_{m,n}` (random-order Kruskal),
/// thinned to keep each edge with probability `keep`.
pub fn random_forest(rng: &mut ChaCha8Rng, m: usize, n: usize, keep: f64) -> SupportGraph {
    let mut cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    cells.shuffle(rng);
    let mut parent: Vec<usize> = (0..m + n).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    let mut edges = Vec::new();
    for (i, j) in cells {
        let (a, b) = (find(&mut parent, i), find(&mut parent, m + j));
        if a != b {
            parent[a] = b;
            if rng.gen_bool(keep) {
                edges.push((i, j));
            }
        }
    }
    if edges.is_empty() {
        edges.push((rng.gen_range(0..m), rng.gen_range(0..n)));
    }
    SupportGraph::new(m, n, edges).unwrap()
}

/// Each cell independently with probability `density`; never empty.
pub fn random_support(rng: &mut ChaCha8Rng, m: usize, n: usize, density: f64) -> SupportGraph {
    let mut edges: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|_| rng.gen_bool(density))
        .collect();
    if edges.is_empty() {
        edges.push((rng.gen_range(0..m), rng.gen_range(0..n)));
    }
    SupportGraph::new(m, n, edges).unwrap()
}

/// Masses `k / 64`, `k` in `1..=64`, on every cell of `s`.
pub fn coupling_on(rng: &mut ChaCha8Rng, s: &SupportGraph) -> Coupling<Rational> {
    Coupling::from_entries(
        s.rows(),
        s.cols(),
        s.edges().iter().map(|&(i, j)| (i, j, q(rng.gen_range(1..=64), 64))),
    )
    .unwrap()
}

pub fn marginal_f64(mu: &DiscreteMarginal<Rational>) -> DiscreteMarginal<f64> {
    DiscreteMarginal::new(mu.weights().iter().map(Scalar::to_f64).collect()).unwrap()
}

pub fn cost_f64(c: &CostMatrix<Rational>) -> CostMatrix<f64> {
    CostMatrix::from_fn(c.rows(), c.cols(), |i, j| c.get(i, j).to_f64()).unwrap()
}

pub fn coupling_f64(g: &Coupling<Rational>) -> Coupling<f64> {
    g.convert(Scalar::to_f64).unwrap()
}

/// Cells of `g` as a support graph, exact zeros excluded.
pub fn support_of<T: Scalar>(g: &Coupling<T>) -> SupportGraph {
    SupportGraph::new(g.rows(), g.cols(), g.entries().iter().map(|(i, j, _)| (*i, *j))).unwrap()
}
