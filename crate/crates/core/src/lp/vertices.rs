//! Brute-force enumeration of the vertices of the transportation polytope.
//!
//! Every feasible spanning-tree basis is visited by breadth-first search
//! over single pivots, trying every tie in the ratio test. The feasible
//! bases of a polytope are connected under pivoting, so the search reaches
//! every vertex. Flows are recomputed per basis by leaf peeling, never
//! carried along a pivot path. Intended as an oracle for small instances.

use std::collections::{HashMap, HashSet, VecDeque};
use std::hash::{BuildHasherDefault, Hasher};
use std::ops::Sub;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::tree::{northwest_corner, RootedTree};
use super::{check_problem, zero_set, DualPotentials, SolveReport, TransportSolver};
use crate::error::{Error, Result};
use crate::measure::{Coupling, CostMatrix, DiscreteMarginal, ToleranceConfig};
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, Copy)]
pub struct EnumerationLimits {
    /// Largest grid `m * n` accepted. Hard ceiling of 64.
    pub max_cells: usize,
    /// Abort once this many feasible bases have been seen.
    pub max_bases: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self {
            max_cells: 36,
            max_bases: 5_000_000,
        }
    }
}

/// A vertex together with every feasible basis representing it.
#[derive(Debug, Clone)]
pub struct Vertex<T> {
    pub coupling: Coupling<T>,
    pub bases: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct VertexEnumeration<T> {
    /// Sorted by support bitmask.
    pub vertices: Vec<Vertex<T>>,
    pub bases_visited: usize,
}

/// A vertex as found by the search: positive cells and their flows.
struct RawVertex<V> {
    support: u64,
    flows: Vec<(usize, V)>,
    bases: Vec<u64>,
}

/// Hasher for basis bitmasks: the splitmix64 finalizer, much cheaper than
/// SipHash, which dominates the search otherwise.
#[derive(Default)]
struct MaskHasher(u64);

impl Hasher for MaskHasher {
    fn finish(&self) -> u64 {
        let mut z = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = self.0.rotate_left(8) ^ u64::from(b);
        }
    }

    fn write_u64(&mut self, x: u64) {
        self.0 ^= x;
    }
}

type MaskSet = HashSet<u64, BuildHasherDefault<MaskHasher>>;
type MaskMap<V> = HashMap<u64, V, BuildHasherDefault<MaskHasher>>;

/// Spanning tree of a basis mask, rebuilt in place without allocation.
struct MaskTree {
    m: usize,
    n: usize,
    row_mask: Vec<u64>,
    col_mask: Vec<u64>,
    parent: Vec<usize>,
    parent_cell: Vec<usize>,
    depth: Vec<usize>,
    order: Vec<usize>,
}

impl MaskTree {
    fn new(m: usize, n: usize) -> Self {
        let nodes = m + n;
        let row_bits = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Self {
            m,
            n,
            row_mask: (0..m).map(|i| row_bits << (i * n)).collect(),
            col_mask: (0..n).map(|j| (0..m).fold(0u64, |acc, i| acc | 1 << (i * n + j))).collect(),
            parent: vec![usize::MAX; nodes],
            parent_cell: vec![usize::MAX; nodes],
            depth: vec![0; nodes],
            order: Vec::with_capacity(nodes),
        }
    }

    /// Breadth-first levels from column 0 over the cells of `basis`.
    fn rebuild(&mut self, basis: u64) {
        let (m, n) = (self.m, self.n);
        let root = m;
        self.order.clear();
        self.order.push(root);
        self.parent[root] = usize::MAX;
        self.depth[root] = 0;
        let mut head = 0;
        while head < self.order.len() {
            let u = self.order[head];
            head += 1;
            let mut cells = basis & if u < m { self.row_mask[u] } else { self.col_mask[u - m] };
            while cells != 0 {
                let cell = cells.trailing_zeros() as usize;
                cells &= cells - 1;
                let v = if u < m { m + cell % n } else { cell / n };
                if v != self.parent[u] || cell != self.parent_cell[u] {
                    self.parent[v] = u;
                    self.parent_cell[v] = cell;
                    self.depth[v] = self.depth[u] + 1;
                    self.order.push(v);
                }
            }
        }
        debug_assert_eq!(self.order.len(), m + n, "basis is a spanning tree");
    }

    /// Tree flows for `supply`, written into `flow` (indexed by cell).
    fn flows<V: Clone + Sub<Output = V>>(&self, supply: &[V], residual: &mut Vec<V>, flow: &mut [V]) {
        residual.clear();
        residual.extend_from_slice(supply);
        for &u in self.order.iter().skip(1).rev() {
            let x = residual[u].clone();
            let p = self.parent[u];
            residual[p] = residual[p].clone() - x.clone();
            flow[self.parent_cell[u]] = x;
        }
    }

    /// Cells of the cycle closed by cell `(i, j)` that decrease when it
    /// enters: every other cell of the tree path, starting next to each end.
    fn decreasing_cells(&self, i: usize, j: usize, out: &mut Vec<usize>) {
        out.clear();
        let (mut a, mut b) = (self.m + j, i);
        let (mut sa, mut sb) = (0usize, 0usize);
        while self.depth[a] > self.depth[b] {
            if sa % 2 == 0 {
                out.push(self.parent_cell[a]);
            }
            a = self.parent[a];
            sa += 1;
        }
        while self.depth[b] > self.depth[a] {
            if sb % 2 == 0 {
                out.push(self.parent_cell[b]);
            }
            b = self.parent[b];
            sb += 1;
        }
        while a != b {
            if sa % 2 == 0 {
                out.push(self.parent_cell[a]);
            }
            if sb % 2 == 0 {
                out.push(self.parent_cell[b]);
            }
            a = self.parent[a];
            b = self.parent[b];
            sa += 1;
            sb += 1;
        }
    }
}

/// Breadth-first search over feasible bases. `supply` lists row masses,
/// then column masses; `positive` decides which flows count as support.
/// Every basis is handed to `visit` with its support mask and flows, the
/// flows off the support zeroed. Returns the number of bases visited.
fn search<V>(
    m: usize,
    n: usize,
    supply: &[V],
    start: u64,
    positive: impl Fn(&V) -> bool,
    limits: &EnumerationLimits,
    mut visit: impl FnMut(u64, u64, &[V]),
) -> Result<usize>
where
    V: Clone + PartialOrd + Sub<Output = V> + Zero,
{
    let cells = m * n;
    let mut seen = MaskSet::default();
    seen.insert(start);
    let mut queue = VecDeque::from([start]);
    let mut tree = MaskTree::new(m, n);
    let mut flow = vec![V::zero(); cells];
    let mut residual = Vec::with_capacity(m + n);
    let mut minus = Vec::with_capacity(m + n);
    let all = if cells == 64 { u64::MAX } else { (1u64 << cells) - 1 };

    while let Some(basis) = queue.pop_front() {
        tree.rebuild(basis);
        tree.flows(supply, &mut residual, &mut flow);
        let mut support = 0u64;
        for c in bits(basis) {
            if positive(&flow[c]) {
                support |= 1 << c;
            } else {
                flow[c] = V::zero();
            }
        }
        visit(basis, support, &flow);

        for entering in bits(all & !basis) {
            tree.decreasing_cells(entering / n, entering % n, &mut minus);
            let mut theta = &flow[minus[0]];
            for &c in &minus[1..] {
                if flow[c] < *theta {
                    theta = &flow[c];
                }
            }
            for &leaving in minus.iter().filter(|&&c| flow[c] == *theta) {
                let next = (basis | 1 << entering) & !(1 << leaving);
                if seen.insert(next) {
                    if seen.len() > limits.max_bases {
                        return Err(Error::TooLarge {
                            what: "feasible bases",
                            size: seen.len(),
                            limit: limits.max_bases,
                        });
                    }
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(seen.len())
}

/// Groups visited bases by the vertex they represent.
struct VertexCollector<V> {
    by_support: MaskMap<RawVertex<V>>,
}

impl<V: Clone> VertexCollector<V> {
    fn new() -> Self {
        Self {
            by_support: MaskMap::default(),
        }
    }

    fn add(&mut self, basis: u64, support: u64, flow: &[V]) {
        self.by_support
            .entry(support)
            .or_insert_with(|| RawVertex {
                support,
                flows: bits(support).map(|c| (c, flow[c].clone())).collect(),
                bases: Vec::new(),
            })
            .bases
            .push(basis);
    }

    fn retain(&mut self, mut keep: impl FnMut(&RawVertex<V>) -> bool) {
        self.by_support.retain(|_, r| keep(r));
    }

    /// Sorted by support bitmask.
    fn into_sorted(self) -> Vec<RawVertex<V>> {
        let mut vertices: Vec<RawVertex<V>> = self.by_support.into_values().collect();
        vertices.sort_by_key(|v| v.support);
        vertices
    }
}

fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (mask != 0).then(|| {
            let b = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            b
        })
    })
}

/// Entries scaled to integers by their common denominator, when every entry
/// is an exact rational and the scaled values stay below `2^40`.
fn integer_form<'a, T: Scalar>(values: impl IntoIterator<Item = &'a T>) -> Option<(Vec<i128>, BigInt)> {
    let exact: Vec<Rational> = values.into_iter().map(|v| v.to_rational()).collect::<Option<_>>()?;
    let lcm = exact.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let bound = 1i128 << 40;
    let ints = exact
        .iter()
        .map(|x| (x.numer() * (&lcm / x.denom())).to_i128().filter(|k| k.abs() < bound))
        .collect::<Option<Vec<_>>>()?;
    Some((ints, lcm))
}

/// Integer supplies for exactly balanced marginals.
fn integer_supply<T: Scalar>(mu: &DiscreteMarginal<T>, nu: &DiscreteMarginal<T>) -> Option<(Vec<i128>, BigInt)> {
    let (ints, lcm) = integer_form(mu.weights().iter().chain(nu.weights()))?;
    let (rows, cols) = ints.split_at(mu.len());
    (rows.iter().sum::<i128>() == cols.iter().sum::<i128>()).then_some((ints, lcm))
}

fn start_basis<T: Scalar>(mu: &DiscreteMarginal<T>, nu: &DiscreteMarginal<T>) -> u64 {
    northwest_corner(mu, nu).iter().fold(0, |acc, (cell, _)| acc | 1 << cell)
}

fn check_size(m: usize, n: usize, limits: &EnumerationLimits) -> Result<()> {
    let cap = limits.max_cells.min(64);
    if m * n > cap {
        return Err(Error::TooLarge {
            what: "grid size m*n",
            size: m * n,
            limit: cap,
        });
    }
    Ok(())
}

fn to_vertex<T: Scalar, V>(m: usize, n: usize, raw: RawVertex<V>, value: impl Fn(&V) -> T) -> Result<Vertex<T>> {
    Ok(Vertex {
        coupling: Coupling::from_entries(m, n, raw.flows.iter().map(|(c, x)| (c / n, c % n, value(x))))?,
        bases: raw.bases,
    })
}

/// Every vertex of the transportation polytope of `(mu, nu)`.
///
/// Marginals that are exact rationals with equal totals are searched in
/// scaled integer arithmetic; anything else in the backend's own arithmetic.
pub fn enumerate_vertices<T: Scalar>(
    mu: &DiscreteMarginal<T>,
    nu: &DiscreteMarginal<T>,
    tol: &ToleranceConfig,
    limits: &EnumerationLimits,
) -> Result<VertexEnumeration<T>> {
    check_problem(mu, nu, None, tol)?;
    let (m, n) = (mu.len(), nu.len());
    check_size(m, n, limits)?;
    let start = start_basis(mu, nu);
    let (vertices, bases_visited) = match integer_supply(mu, nu) {
        Some((supply, lcm)) => {
            let mut found = VertexCollector::new();
            let visited = search(m, n, &supply, start, |x| *x > 0, limits, |b, s, f| found.add(b, s, f))?;
            let raw = found.into_sorted();
            let back = |k: &i128| T::from_rational(&Rational::new(BigInt::from(*k), lcm.clone()));
            let vertices = raw.into_iter().map(|r| to_vertex(m, n, r, back)).collect::<Result<_>>()?;
            (vertices, visited)
        }
        None => {
            let eps = T::tolerance(tol.eps_mass);
            let supply: Vec<T> = mu.weights().iter().chain(nu.weights()).cloned().collect();
            let mut found = VertexCollector::new();
            let visited = search(m, n, &supply, start, |x| *x > eps, limits, |b, s, f| found.add(b, s, f))?;
            let raw = found.into_sorted();
            let vertices = raw.into_iter().map(|r| to_vertex(m, n, r, T::clone)).collect::<Result<_>>()?;
            (vertices, visited)
        }
    };
    Ok(VertexEnumeration {
        vertices,
        bases_visited,
    })
}

/// A vertex and its objective value.
type ScoredVertex<T> = (Vertex<T>, T);

/// Optimal vertices with their objective values, plus the number of bases visited.
fn optimal_vertices<T: Scalar>(
    mu: &DiscreteMarginal<T>,
    nu: &DiscreteMarginal<T>,
    c: &CostMatrix<T>,
    tol: &ToleranceConfig,
    limits: &EnumerationLimits,
) -> Result<(Vec<ScoredVertex<T>>, usize)> {
    check_problem(mu, nu, Some(c), tol)?;
    let (m, n) = (mu.len(), nu.len());
    check_size(m, n, limits)?;
    let costs = integer_form((0..m).flat_map(|i| c.row(i)));
    if let (Some((supply, lcm)), Some((cost, cost_lcm))) = (integer_supply(mu, nu), costs) {
        // objective values are exact integers over lcm * cost_lcm; only
        // vertices within `slack` of the best value so far are kept
        let denom = &lcm * &cost_lcm;
        let slack = if T::EXACT {
            0
        } else {
            (tol.eps_cost * denom.to_f64().unwrap_or(f64::INFINITY)).min(1e30) as i128
        };
        let value_of = |flows: &[(usize, i128)]| flows.iter().map(|(c, k)| k * cost[*c]).sum::<i128>();
        let mut best: Option<i128> = None;
        let mut found = VertexCollector::new();
        let visited = search(m, n, &supply, start_basis(mu, nu), |x| *x > 0, limits, |basis, support, flow| {
            let value: i128 = bits(support).map(|c| flow[c] * cost[c]).sum();
            if best.is_none_or(|b| value < b) {
                best = Some(value);
                found.retain(|r| value_of(&r.flows) - value <= slack);
            }
            if best.is_some_and(|b| value - b <= slack) {
                found.add(basis, support, flow);
            }
        })?;
        let back = |k: &i128, d: &BigInt| T::from_rational(&Rational::new(BigInt::from(*k), d.clone()));
        let mut out = Vec::new();
        for r in found.into_sorted() {
            let value = value_of(&r.flows);
            out.push((to_vertex(m, n, r, |k| back(k, &lcm))?, back(&value, &denom)));
        }
        return Ok((out, visited));
    }
    let all = enumerate_vertices(mu, nu, tol, limits)?;
    let visited = all.bases_visited;
    let scored: Vec<(Vertex<T>, T)> = all
        .vertices
        .into_iter()
        .map(|v| {
            let value = v.coupling.cost(c);
            (v, value)
        })
        .collect();
    let Some(best) = scored.iter().map(|(_, v)| v.clone()).reduce(T::min_val) else {
        return Ok((Vec::new(), visited));
    };
    let eps = T::tolerance(tol.eps_cost);
    let optimal = scored
        .into_iter()
        .filter(|(_, v)| v.clone() - best.clone() <= eps)
        .collect();
    Ok((optimal, visited))
}

/// Every optimal vertex of the transportation problem, deduplicated.
pub fn enumerate_optimal_vertices<T: Scalar>(
    mu: &DiscreteMarginal<T>,
    nu: &DiscreteMarginal<T>,
    c: &CostMatrix<T>,
    tol: &ToleranceConfig,
    limits: &EnumerationLimits,
) -> Result<Vec<Coupling<T>>> {
    Ok(optimal_vertices(mu, nu, c, tol, limits)?
        .0
        .into_iter()
        .map(|(v, _)| v.coupling)
        .collect())
}

/// True iff the optimal face is a single vertex.
pub fn is_unique_optimum<T: Scalar>(
    mu: &DiscreteMarginal<T>,
    nu: &DiscreteMarginal<T>,
    c: &CostMatrix<T>,
    tol: &ToleranceConfig,
    limits: &EnumerationLimits,
) -> Result<bool> {
    Ok(enumerate_optimal_vertices(mu, nu, c, tol, limits)?.len() == 1)
}

/// Largest zero set [`optimal_face_vertices`] will search exhaustively.
pub const FACE_EDGE_LIMIT: usize = 30;

/// Vertices of the optimal face certified by dual potentials `p`.
///
/// Complementary slackness confines every optimal coupling to the zero set
/// `Z` of a dual-feasible `p`, and every coupling on `Z` has the dual value
/// as cost. The face is therefore the set of couplings supported in `Z`, and
/// its vertices are those with acyclic support. All subsets of `Z` are
/// tried, so the search suits grids too large for [`enumerate_vertices`]
/// as long as `Z` has at most [`FACE_EDGE_LIMIT`] cells. An empty face
/// means `p` is not optimal and is reported as an error.
pub fn optimal_face_vertices<T: Scalar>(
    mu: &DiscreteMarginal<T>,
    nu: &DiscreteMarginal<T>,
    c: &CostMatrix<T>,
    p: &DualPotentials<T>,
    tol: &ToleranceConfig,
) -> Result<Vec<Coupling<T>>> {
    check_problem(mu, nu, Some(c), tol)?;
    let (m, n) = (mu.len(), nu.len());
    let z = zero_set(c, p, tol)?;
    let edges = z.edges();
    if edges.len() > FACE_EDGE_LIMIT {
        return Err(Error::TooLarge {
            what: "zero-set cells",
            size: edges.len(),
            limit: FACE_EDGE_LIMIT,
        });
    }
    let eps = T::tolerance(tol.eps_mass);
    let supply: Vec<T> = mu.weights().iter().chain(nu.weights()).cloned().collect();
    let mut found = Vec::new();
    for mask in 1u64..1 << edges.len() {
        if mask.count_ones() as usize > m + n - 1 {
            continue;
        }
        let chosen: Vec<(usize, usize)> = bits(mask).map(|b| edges[b]).collect();
        if let Some(flows) = forest_flows(m, n, &chosen, &supply, &eps) {
            found.push(Coupling::from_entries(
                m,
                n,
                chosen.iter().zip(flows).map(|(&(i, j), x)| (i, j, x)),
            )?);
        }
    }
    if found.is_empty() {
        return Err(Error::InvalidInput(
            "no feasible coupling lives on the zero set; the potentials are not optimal".into(),
        ));
    }
    Ok(found)
}

/// The flows on an acyclic edge set meeting the supplies exactly, if they
/// exist and are all positive.
fn forest_flows<T: Scalar>(m: usize, n: usize, edges: &[(usize, usize)], supply: &[T], eps: &T) -> Option<Vec<T>> {
    let nodes = m + n;
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (e, &(i, j)) in edges.iter().enumerate() {
        incident[i].push(e);
        incident[m + j].push(e);
    }
    let mut degree: Vec<usize> = incident.iter().map(Vec::len).collect();
    let mut residual = supply.to_vec();
    let mut flows: Vec<Option<T>> = vec![None; edges.len()];
    let mut leaves: Vec<usize> = (0..nodes).filter(|&u| degree[u] == 1).collect();
    while let Some(u) = leaves.pop() {
        if degree[u] != 1 {
            continue;
        }
        let e = *incident[u].iter().find(|&&e| flows[e].is_none())?;
        let (i, j) = edges[e];
        let v = if u == i { m + j } else { i };
        let x = residual[u].clone();
        if x <= *eps {
            return None;
        }
        residual[u] = T::zero();
        residual[v] = residual[v].clone() - x.clone();
        flows[e] = Some(x);
        degree[u] = 0;
        degree[v] -= 1;
        if degree[v] == 1 {
            leaves.push(v);
        }
    }
    // a cycle leaves edges unassigned; stranded mass means infeasibility
    if residual.iter().any(|r| r.abs_val() > *eps) {
        return None;
    }
    flows.into_iter().collect()
}

/// Exhaustive solver: the cheapest enumerated vertex, with duals taken from
/// one of its dual-feasible bases.
#[derive(Debug, Clone, Default)]
pub struct VertexEnumerator {
    pub limits: EnumerationLimits,
}

impl<T: Scalar> TransportSolver<T> for VertexEnumerator {
    fn name(&self) -> &'static str {
        "enumerate"
    }

    fn solve(
        &self,
        mu: &DiscreteMarginal<T>,
        nu: &DiscreteMarginal<T>,
        cost: &CostMatrix<T>,
        tol: &ToleranceConfig,
    ) -> Result<SolveReport<T>> {
        let (m, n) = (mu.len(), nu.len());
        let (optimal, visited) = optimal_vertices(mu, nu, cost, tol, &self.limits)?;
        for (vertex, value) in optimal {
            for &basis in &vertex.bases {
                let tree = RootedTree::build(m, n, bits(basis)).expect("enumerated bases are trees");
                let (q, r) = tree.potentials(cost);
                let potentials = DualPotentials { q, r };
                if potentials.first_violation(cost, tol).is_none() {
                    let dual_value = potentials.value(mu, nu);
                    return Ok(SolveReport {
                        coupling: vertex.coupling,
                        potentials,
                        primal_value: value,
                        dual_value,
                        iterations: visited,
                    });
                }
            }
        }
        Err(Error::InvalidInput(
            "no dual-feasible basis among the optimal vertices".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn single_point_has_one_vertex() {
        let tol = ToleranceConfig::default();
        let mu = DiscreteMarginal::new(vec![r(1, 1)]).unwrap();
        let c = CostMatrix::new(1, 1, vec![r(3, 1)]).unwrap();
        let opt = enumerate_optimal_vertices(&mu, &mu, &c, &tol, &EnumerationLimits::default()).unwrap();
        assert_eq!(opt.len(), 1);
        assert!(is_unique_optimum(&mu, &mu, &c, &tol, &EnumerationLimits::default()).unwrap());
    }

    #[test]
    fn zero_cost_two_by_two_has_two_optimal_vertices() {
        let tol = ToleranceConfig::default();
        let mu = DiscreteMarginal::uniform(2, r(1, 1));
        let c = CostMatrix::new(2, 2, vec![r(0, 1); 4]).unwrap();
        let opt = enumerate_optimal_vertices(&mu, &mu, &c, &tol, &EnumerationLimits::default()).unwrap();
        let diag = Coupling::from_entries(2, 2, [(0, 0, r(1, 2)), (1, 1, r(1, 2))]).unwrap();
        let anti = Coupling::from_entries(2, 2, [(0, 1, r(1, 2)), (1, 0, r(1, 2))]).unwrap();
        assert_eq!(opt.len(), 2);
        assert!(opt.contains(&diag) && opt.contains(&anti));
        assert!(!is_unique_optimum(&mu, &mu, &c, &tol, &EnumerationLimits::default()).unwrap());
    }

    #[test]
    fn twisted_cost_has_unique_optimum() {
        // distinct powers of two make every vertex cost distinct
        let tol = ToleranceConfig::default();
        let mu = DiscreteMarginal::new(vec![r(1, 3), r(2, 3)]).unwrap();
        let nu = DiscreteMarginal::new(vec![r(1, 2), r(1, 4), r(1, 4)]).unwrap();
        let c = CostMatrix::from_fn(2, 3, |i, j| r(1 << (3 * i + j), 1)).unwrap();
        assert!(is_unique_optimum(&mu, &nu, &c, &tol, &EnumerationLimits::default()).unwrap());
    }

    #[test]
    fn size_guard() {
        let tol = ToleranceConfig::default();
        let mu = DiscreteMarginal::uniform(7, r(1, 1));
        let c = CostMatrix::new(7, 7, vec![r(0, 1); 49]).unwrap();
        assert!(matches!(
            enumerate_optimal_vertices(&mu, &mu, &c, &tol, &EnumerationLimits::default()),
            Err(Error::TooLarge { size: 49, limit: 36, .. })
        ));
    }

    #[test]
    fn enumerator_solver_reports_dual_feasible_potentials() {
        let tol = ToleranceConfig::default();
        let mu = DiscreteMarginal::new(vec![r(3, 10), r(7, 10)]).unwrap();
        let nu = DiscreteMarginal::new(vec![r(1, 5), r(1, 5), r(3, 5)]).unwrap();
        let c = CostMatrix::from_rows(vec![vec![r(4, 1), r(1, 1), r(3, 1)], vec![r(2, 1), r(5, 1), r(1, 1)]]).unwrap();
        let rep = VertexEnumerator::default().solve(&mu, &nu, &c, &tol).unwrap();
        assert_eq!(rep.primal_value, r(7, 5));
        assert_eq!(rep.dual_value, r(7, 5));
    }

    #[test]
    fn face_oracle_matches_full_enumeration() {
        let tol = ToleranceConfig::default();
        let mu = DiscreteMarginal::uniform(2, r(1, 1));
        let zero = CostMatrix::new(2, 2, vec![r(0, 1); 4]).unwrap();
        let p = DualPotentials {
            q: vec![r(0, 1); 2],
            r: vec![r(0, 1); 2],
        };
        let face = optimal_face_vertices(&mu, &mu, &zero, &p, &tol).unwrap();
        let all = enumerate_optimal_vertices(&mu, &mu, &zero, &tol, &EnumerationLimits::default()).unwrap();
        assert_eq!(face.len(), 2);
        assert!(face.iter().all(|v| all.contains(v)));

        let mu = DiscreteMarginal::new(vec![r(3, 10), r(7, 10)]).unwrap();
        let nu = DiscreteMarginal::new(vec![r(1, 5), r(1, 5), r(3, 5)]).unwrap();
        let c = CostMatrix::from_rows(vec![vec![r(4, 1), r(1, 1), r(3, 1)], vec![r(2, 1), r(5, 1), r(1, 1)]]).unwrap();
        let rep = VertexEnumerator::default().solve(&mu, &nu, &c, &tol).unwrap();
        let face = optimal_face_vertices(&mu, &nu, &c, &rep.potentials, &tol).unwrap();
        // two vertices cost 7/5 here
        let all = enumerate_optimal_vertices(&mu, &nu, &c, &tol, &EnumerationLimits::default()).unwrap();
        assert_eq!((face.len(), all.len()), (2, 2));
        assert!(face.iter().all(|v| all.contains(v)));
        assert!(face.contains(&rep.coupling));
    }

    #[test]
    fn face_oracle_rejects_suboptimal_potentials() {
        let tol = ToleranceConfig::default();
        let mu = DiscreteMarginal::uniform(2, r(1, 1));
        let c = CostMatrix::new(2, 2, vec![r(0, 1), r(1, 1), r(1, 1), r(0, 1)]).unwrap();
        // feasible but slack everywhere except the off-diagonal
        let p = DualPotentials {
            q: vec![r(0, 1); 2],
            r: vec![r(-1, 1), r(0, 1)],
        };
        assert!(matches!(
            optimal_face_vertices(&mu, &mu, &c, &p, &tol),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn float_marginals_with_inexact_totals_use_the_float_search() {
        let tol = ToleranceConfig::default();
        let mu = DiscreteMarginal::new(vec![0.1, 0.2]).unwrap();
        let nu = DiscreteMarginal::new(vec![0.3]).unwrap();
        let e = enumerate_vertices(&mu, &nu, &tol, &EnumerationLimits::default()).unwrap();
        assert_eq!(e.vertices.len(), 1);
        assert_eq!(e.vertices[0].coupling.entries(), &[(0, 0, 0.1), (1, 0, 0.2)]);
    }
}
