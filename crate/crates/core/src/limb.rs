//! Numbered limb systems: alternating unions of graphs (rows to columns)
//! and antigraphs (columns to rows) over a numbered partition of the rows
//! (odd labels) and columns (even labels).
//!
//! Limb `k` is a graph for odd `k` and an antigraph for even `k`; its
//! domain lies in `I_k` and its range in `I_{k-1}`. A coupling vanishing
//! outside such a system is pinned down by its marginals, and
//! [`reconstruct`] computes it from the top limb down.

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::extremality::{is_acyclic, SupportGraph};
use crate::measure::{
    marginals_of, pushforward_antigraph, pushforward_graph, Coupling, DiscreteMarginal, PartialMap, ToleranceConfig,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimbKind {
    /// `{(x, f(x))}` for a map from rows to columns.
    Graph,
    /// `{(g(y), y)}` for a map from columns to rows.
    Antigraph,
}

impl LimbKind {
    pub fn for_index(k: usize) -> Self {
        if k % 2 == 1 {
            LimbKind::Graph
        } else {
            LimbKind::Antigraph
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LimbKind::Graph => "graph",
            LimbKind::Antigraph => "antigraph",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Limb {
    pub index: usize,
    pub kind: LimbKind,
    pub map: PartialMap,
}

impl Limb {
    pub fn new(index: usize, map: PartialMap) -> Self {
        Self {
            index,
            kind: LimbKind::for_index(index),
            map,
        }
    }

    /// Grid cells `(row, col)` covered by this limb.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        match self.kind {
            LimbKind::Graph => self.map.pairs().collect(),
            LimbKind::Antigraph => {
                let mut cells: Vec<_> = self.map.pairs().map(|(y, x)| (x, y)).collect();
                cells.sort_unstable();
                cells
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumberedLimbSystem {
    pub m: usize,
    pub n: usize,
    /// Limb `k` sits at position `k - 1`.
    pub limbs: Vec<Limb>,
    /// Odd label of each row.
    pub i_odd: Vec<usize>,
    /// Even label of each column.
    pub i_even: Vec<usize>,
}

impl NumberedLimbSystem {
    /// All cells of the system.
    pub fn support(&self) -> Result<SupportGraph> {
        SupportGraph::new(self.m, self.n, self.limbs.iter().flat_map(Limb::cells))
    }

    /// Index and kind of the limb covering cell `(i, j)`.
    pub fn limb_at(&self, i: usize, j: usize) -> Option<&Limb> {
        self.limbs.iter().find(|l| match l.kind {
            LimbKind::Graph => l.map.get(i) == Some(j),
            LimbKind::Antigraph => l.map.get(j) == Some(i),
        })
    }
}

/// Outcome of [`validate_system`]; empty when the system is valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SystemReport {
    pub violations: Vec<String>,
}

impl SystemReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_system(s: &NumberedLimbSystem) -> SystemReport {
    let mut v = Vec::new();
    if s.i_odd.len() != s.m {
        v.push(format!("I_odd has {} labels for {} rows", s.i_odd.len(), s.m));
    }
    if s.i_even.len() != s.n {
        v.push(format!("I_even has {} labels for {} columns", s.i_even.len(), s.n));
    }
    for (x, &k) in s.i_odd.iter().enumerate() {
        if k % 2 == 0 {
            v.push(format!("row {x} carries even label {k}"));
        }
    }
    for (y, &k) in s.i_even.iter().enumerate() {
        if k % 2 == 1 {
            v.push(format!("column {y} carries odd label {k}"));
        }
    }
    let row_label = |x: usize| s.i_odd.get(x).copied();
    let col_label = |y: usize| s.i_even.get(y).copied();

    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    for (pos, limb) in s.limbs.iter().enumerate() {
        let k = limb.index;
        if k != pos + 1 {
            v.push(format!("limb at position {pos} has index {k}, expected {}", pos + 1));
        }
        if limb.kind != LimbKind::for_index(k) {
            v.push(format!("limb {k} is a {} but its parity requires a {}", limb.kind.as_str(), LimbKind::for_index(k).as_str()));
            continue;
        }
        let (dom_size, cod_size) = match limb.kind {
            LimbKind::Graph => (s.m, s.n),
            LimbKind::Antigraph => (s.n, s.m),
        };
        if limb.map.domain_size() != dom_size || limb.map.codomain_size() != cod_size {
            v.push(format!(
                "limb {k} maps {} points into {}, expected {dom_size} into {cod_size}",
                limb.map.domain_size(),
                limb.map.codomain_size()
            ));
            continue;
        }
        for (a, b) in limb.map.pairs() {
            let (dom_label, ran_label) = match limb.kind {
                LimbKind::Graph => (row_label(a), col_label(b)),
                LimbKind::Antigraph => (col_label(a), row_label(b)),
            };
            if dom_label != Some(k) {
                v.push(format!("limb {k}: domain point {a} has label {dom_label:?}, not {k}"));
            }
            if ran_label != Some(k - 1) {
                v.push(format!("limb {k}: image {b} of {a} has label {ran_label:?}, not {}", k - 1));
            }
        }
        for cell in limb.cells() {
            if !seen.insert(cell) {
                v.push(format!("cell {cell:?} belongs to more than one limb"));
            }
        }
    }
    SystemReport { violations: v }
}

/// Largest `k` whose limb has a non-empty domain.
pub fn limb_count(s: &NumberedLimbSystem) -> usize {
    s.limbs.iter().rev().find(|l| !l.map.is_empty()).map_or(0, |l| l.index)
}

/// Splits a forest into limbs by breadth-first levels. Each tree is rooted
/// at its column of largest degree (lowest index on ties); a node at depth
/// `d` joins `I_d` and its edge to its parent joins limb `d`.
pub fn decompose(s: &SupportGraph) -> Result<NumberedLimbSystem> {
    decompose_with_roots(s, &[])
}

/// As [`decompose`], but a tree containing one of `preferred_roots`
/// (column indices) is rooted at the first such column.
pub fn decompose_with_roots(s: &SupportGraph, preferred_roots: &[usize]) -> Result<NumberedLimbSystem> {
    if let (false, Some(cycle)) = is_acyclic(s) {
        return Err(Error::Cyclic(cycle));
    }
    let (m, n) = (s.rows(), s.cols());
    let adj = s.adjacency();
    let col_deg = s.col_degrees();
    let mut depth: Vec<Option<usize>> = vec![None; m + n];
    let mut parent = vec![usize::MAX; m + n];

    for y in 0..n {
        if depth[m + y].is_some() || col_deg[y] == 0 {
            continue;
        }
        let component = bfs(&adj, m + y, |_, _| {});
        let cols: Vec<usize> = component.iter().filter(|&&u| u >= m).map(|&u| u - m).collect();
        let root = preferred_roots
            .iter()
            .copied()
            .find(|r| cols.contains(r))
            .unwrap_or_else(|| {
                *cols
                    .iter()
                    .max_by(|&&a, &&b| col_deg[a].cmp(&col_deg[b]).then(b.cmp(&a)))
                    .expect("component has a column")
            });
        depth[m + root] = Some(0);
        bfs(&adj, m + root, |u, p| {
            depth[u] = Some(depth[p].expect("parent levelled first") + 1);
            parent[u] = p;
        });
    }

    let levels = depth.iter().filter_map(|d| *d).max().unwrap_or(0);
    let mut limbs: Vec<Limb> = (1..=levels)
        .map(|k| match LimbKind::for_index(k) {
            LimbKind::Graph => Limb::new(k, PartialMap::empty(m, n)),
            LimbKind::Antigraph => Limb::new(k, PartialMap::empty(n, m)),
        })
        .collect();
    for u in 0..m + n {
        if let Some(d) = depth[u].filter(|&d| d > 0) {
            let p = parent[u];
            if u < m {
                limbs[d - 1].map.set(u, p - m);
            } else {
                limbs[d - 1].map.set(u - m, p);
            }
        }
    }
    Ok(NumberedLimbSystem {
        m,
        n,
        limbs,
        i_odd: (0..m).map(|x| depth[x].unwrap_or(1)).collect(),
        i_even: (0..n).map(|y| depth[m + y].unwrap_or(0)).collect(),
    })
}

/// Breadth-first order from `root`, reporting each tree edge as `(child, parent)`.
fn bfs(adj: &[Vec<usize>], root: usize, mut on_edge: impl FnMut(usize, usize)) -> Vec<usize> {
    let mut seen = vec![false; adj.len()];
    seen[root] = true;
    let mut order = vec![root];
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                on_edge(v, u);
                order.push(v);
                queue.push_back(v);
            }
        }
    }
    order
}

#[derive(Debug, Clone, PartialEq)]
pub enum Infeasibility {
    /// The residual marginal feeding limb `limb` is negative at `point`.
    NegativeEta { limb: usize, point: usize, value: f64 },
    /// The assembled coupling misses a prescribed marginal.
    MarginalMismatch { side: MarginalSide, point: usize, deviation: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalSide {
    Mu,
    Nu,
}

#[derive(Debug, Clone)]
pub struct ReconstructionReport<T> {
    pub coupling: Coupling<T>,
    /// `eta[k - 1]` feeds limb `k`: on rows for odd `k`, on columns for even `k`.
    pub eta: Vec<DiscreteMarginal<T>>,
    pub feasible: bool,
    pub infeasibility: Option<Infeasibility>,
}

/// The unique coupling with marginals `mu`, `nu` vanishing outside the
/// system, if one exists.
///
/// For `k = N, ..., 1`: `eta_k` is the prescribed marginal minus the
/// projection of `gamma_{k+1}`, restricted to `Dom f_k`, and `gamma_k` is
/// its push-forward onto the graph (odd `k`) or antigraph (even `k`).
pub fn reconstruct<T: Scalar>(
    s: &NumberedLimbSystem,
    mu: &DiscreteMarginal<T>,
    nu: &DiscreteMarginal<T>,
    tol: &ToleranceConfig,
) -> Result<ReconstructionReport<T>> {
    let report = validate_system(s);
    if !report.is_valid() {
        return Err(Error::InvalidSystem(report.violations));
    }
    if (mu.len(), nu.len()) != (s.m, s.n) {
        return Err(Error::Dimension {
            context: "marginals against limb system",
            expected: (s.m, s.n),
            found: (mu.len(), nu.len()),
        });
    }
    let eps = T::tolerance(tol.eps_mass);
    let mut total = Coupling::empty(s.m, s.n);
    let mut etas = Vec::with_capacity(s.limbs.len());
    // projection of gamma_{k+1} onto the domain side of limb k
    let mut carry: Option<Vec<T>> = None;

    for limb in s.limbs.iter().rev() {
        let marginal = match limb.kind {
            LimbKind::Graph => mu,
            LimbKind::Antigraph => nu,
        };
        let mut eta = vec![T::zero(); marginal.len()];
        for a in limb.map.domain() {
            let mut w = marginal.weight(a).clone();
            if let Some(c) = &carry {
                w = w - c[a].clone();
            }
            if w < -eps.clone() || (w < T::zero() && T::EXACT) {
                etas.reverse();
                return Ok(ReconstructionReport {
                    coupling: total,
                    eta: etas,
                    feasible: false,
                    infeasibility: Some(Infeasibility::NegativeEta {
                        limb: limb.index,
                        point: a,
                        value: w.to_f64(),
                    }),
                });
            }
            eta[a] = if w < T::zero() { T::zero() } else { w };
        }
        let eta = DiscreteMarginal::new(eta)?;
        let gamma_k = match limb.kind {
            LimbKind::Graph => pushforward_graph(&limb.map, &eta, tol)?,
            LimbKind::Antigraph => pushforward_antigraph(&limb.map, &eta, tol)?,
        };
        let (rows, cols) = marginals_of(&gamma_k);
        carry = Some(match limb.kind {
            LimbKind::Graph => cols.weights().to_vec(),
            LimbKind::Antigraph => rows.weights().to_vec(),
        });
        total = total.plus(&gamma_k)?;
        etas.push(eta);
    }
    etas.reverse();

    let (rows, cols) = marginals_of(&total);
    let mismatch = |side, have: &DiscreteMarginal<T>, want: &DiscreteMarginal<T>| {
        have.weights()
            .iter()
            .zip(want.weights())
            .position(|(a, b)| (a.clone() - b.clone()).abs_val() > eps)
            .map(|point| Infeasibility::MarginalMismatch {
                side,
                point,
                deviation: (have.weight(point).clone() - want.weight(point).clone()).to_f64(),
            })
    };
    let infeasibility = mismatch(MarginalSide::Mu, &rows, mu).or_else(|| mismatch(MarginalSide::Nu, &cols, nu));
    Ok(ReconstructionReport {
        coupling: total,
        eta: etas,
        feasible: infeasibility.is_none(),
        infeasibility,
    })
}

/// Maps of a two-limb representation: `f1` rows to columns, `f2` columns to rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLimbMaps {
    pub f1: PartialMap,
    pub f2: PartialMap,
}

impl TwoLimbMaps {
    /// The system with every row in `I_1`, `Dom f2` in `I_2`, other columns in `I_0`.
    pub fn to_system(&self) -> NumberedLimbSystem {
        let (m, n) = (self.f1.domain_size(), self.f2.domain_size());
        let mut limbs = vec![Limb::new(1, self.f1.clone())];
        if !self.f2.is_empty() {
            limbs.push(Limb::new(2, self.f2.clone()));
        }
        let mut i_even = vec![0; n];
        self.f2.domain().for_each(|y| i_even[y] = 2);
        NumberedLimbSystem {
            m,
            n,
            limbs,
            i_odd: vec![1; m],
            i_even,
        }
    }
}

/// Finds `f1`, `f2` with `S = Graph(f1) ∪ Antigraph(f2)` and
/// `Ran f1 ∩ Dom f2 = ∅`, if they exist.
///
/// Columns of degree two or more can only sit in `I_0`, so a representation
/// exists iff no row has two edges into such columns. Rows without one take
/// their lowest single-edge column as graph edge; the remaining single-edge
/// columns form the antigraph.
pub fn two_limb_check(s: &SupportGraph) -> Option<TwoLimbMaps> {
    let (m, n) = (s.rows(), s.cols());
    let col_deg = s.col_degrees();
    let mut f1 = PartialMap::empty(m, n);
    for x in 0..m {
        let mut row_edges = s.edges().iter().filter(|e| e.0 == x).map(|e| e.1);
        let hubs: Vec<usize> = row_edges.clone().filter(|&y| col_deg[y] >= 2).collect();
        match hubs.as_slice() {
            [] => {
                if let Some(y) = row_edges.next() {
                    f1.set(x, y);
                }
            }
            [y] => f1.set(x, *y),
            _ => return None,
        }
    }
    let in_range: HashSet<usize> = f1.range().into_iter().collect();
    let mut f2 = PartialMap::empty(n, m);
    for &(x, y) in s.edges() {
        if !in_range.contains(&y) {
            f2.set(y, x);
        }
    }
    Some(TwoLimbMaps { f1, f2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    /// x0-y0, x0-y1, x1-y1 levelled from y0.
    fn path_system() -> NumberedLimbSystem {
        let s = SupportGraph::new(2, 2, [(0, 0), (0, 1), (1, 1)]).unwrap();
        decompose_with_roots(&s, &[0]).unwrap()
    }

    #[test]
    fn single_limb_identity_is_valid() {
        let sys = NumberedLimbSystem {
            m: 3,
            n: 3,
            limbs: vec![Limb::new(1, PartialMap::identity(3))],
            i_odd: vec![1; 3],
            i_even: vec![0; 3],
        };
        assert!(validate_system(&sys).is_valid());
        assert_eq!(limb_count(&sys), 1);
    }

    #[test]
    fn range_outside_i0_is_rejected() {
        let sys = NumberedLimbSystem {
            m: 2,
            n: 2,
            limbs: vec![Limb::new(1, PartialMap::identity(2))],
            i_odd: vec![1; 2],
            i_even: vec![0, 2],
        };
        let report = validate_system(&sys);
        assert!(!report.is_valid());
        assert!(report.violations[0].contains("image 1"));
    }

    #[test]
    fn parity_and_numbering_are_checked() {
        let mut sys = path_system();
        sys.limbs[1].kind = LimbKind::Graph;
        assert!(!validate_system(&sys).is_valid());
        let mut sys = path_system();
        sys.limbs.remove(0);
        assert!(!validate_system(&sys).is_valid());
        let mut sys = path_system();
        sys.i_odd[0] = 2;
        assert!(!validate_system(&sys).is_valid());
    }

    #[test]
    fn diagonal_decomposes_to_one_limb() {
        let s = SupportGraph::new(3, 3, [(0, 0), (1, 1), (2, 2)]).unwrap();
        let sys = decompose(&s).unwrap();
        assert_eq!(limb_count(&sys), 1);
        assert_eq!(sys.limbs[0].map, PartialMap::identity(3));
        assert_eq!(sys.i_even, [0, 0, 0]);
        assert!(validate_system(&sys).is_valid());
    }

    #[test]
    fn path_levelled_from_y0_has_three_limbs() {
        let sys = path_system();
        assert_eq!(limb_count(&sys), 3);
        assert_eq!(sys.limbs[0].map.pairs().collect::<Vec<_>>(), [(0, 0)]);
        assert_eq!(sys.limbs[1].map.pairs().collect::<Vec<_>>(), [(1, 0)]);
        assert_eq!(sys.limbs[2].map.pairs().collect::<Vec<_>>(), [(1, 1)]);
        assert_eq!(sys.i_odd, [1, 3]);
        assert_eq!(sys.i_even, [0, 2]);
        assert!(validate_system(&sys).is_valid());
    }

    #[test]
    fn default_root_is_the_busiest_column() {
        let s = SupportGraph::new(2, 2, [(0, 0), (0, 1), (1, 1)]).unwrap();
        let sys = decompose(&s).unwrap();
        // y1 has two edges, so both rows hang from it
        assert_eq!(limb_count(&sys), 2);
        assert_eq!(sys.i_even, [2, 0]);
    }

    #[test]
    fn empty_support_has_no_limbs() {
        let s = SupportGraph::new(2, 3, []).unwrap();
        let sys = decompose(&s).unwrap();
        assert_eq!(limb_count(&sys), 0);
        assert_eq!(sys.i_odd, [1, 1]);
        assert_eq!(sys.i_even, [0, 0, 0]);
    }

    #[test]
    fn cyclic_support_is_rejected() {
        let s = SupportGraph::new(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        assert!(matches!(decompose(&s), Err(Error::Cyclic(_))));
    }

    #[test]
    fn reconstruct_identity() {
        let tol = ToleranceConfig::default();
        let sys = decompose(&SupportGraph::new(3, 3, [(0, 0), (1, 1), (2, 2)]).unwrap()).unwrap();
        let mu = DiscreteMarginal::uniform(3, r(1, 1));
        let rep = reconstruct(&sys, &mu, &mu, &tol).unwrap();
        assert!(rep.feasible);
        assert_eq!(rep.coupling, Coupling::from_entries(3, 3, (0..3).map(|i| (i, i, r(1, 3)))).unwrap());
    }

    #[test]
    fn reconstruct_path_by_hand() {
        let tol = ToleranceConfig::default();
        let mu = DiscreteMarginal::new(vec![r(1, 2), r(1, 2)]).unwrap();
        let nu = DiscreteMarginal::new(vec![r(1, 5), r(4, 5)]).unwrap();
        let rep = reconstruct(&path_system(), &mu, &nu, &tol).unwrap();
        assert!(rep.feasible);
        assert_eq!(rep.eta[2].weights(), &[r(0, 1), r(1, 2)]);
        assert_eq!(rep.eta[1].weights(), &[r(0, 1), r(3, 10)]);
        assert_eq!(rep.eta[0].weights(), &[r(1, 5), r(0, 1)]);
        let expected = Coupling::from_entries(2, 2, [(0, 0, r(1, 5)), (0, 1, r(3, 10)), (1, 1, r(1, 2))]).unwrap();
        assert_eq!(rep.coupling, expected);
    }

    #[test]
    fn reconstruct_path_infeasible() {
        let tol = ToleranceConfig::default();
        let mu = DiscreteMarginal::new(vec![r(1, 2), r(1, 2)]).unwrap();
        let nu = DiscreteMarginal::new(vec![r(9, 10), r(1, 10)]).unwrap();
        let rep = reconstruct(&path_system(), &mu, &nu, &tol).unwrap();
        assert!(!rep.feasible);
        match rep.infeasibility {
            Some(Infeasibility::NegativeEta { limb, point, value }) => {
                assert_eq!((limb, point), (2, 1));
                assert!((value + 0.4).abs() < 1e-12);
            }
            other => panic!("expected a negative eta, got {other:?}"),
        }
    }

    #[test]
    fn reconstruct_reports_marginal_mismatch() {
        let tol = ToleranceConfig::default();
        let sys = decompose(&SupportGraph::new(2, 2, [(0, 0), (1, 1)]).unwrap()).unwrap();
        let mu = DiscreteMarginal::new(vec![r(1, 2), r(1, 2)]).unwrap();
        let nu = DiscreteMarginal::new(vec![r(1, 4), r(3, 4)]).unwrap();
        let rep = reconstruct(&sys, &mu, &nu, &tol).unwrap();
        assert!(!rep.feasible);
        assert!(matches!(
            rep.infeasibility,
            Some(Infeasibility::MarginalMismatch { side: MarginalSide::Nu, point: 0, .. })
        ));
    }

    #[test]
    fn reconstruct_rejects_invalid_system() {
        let tol = ToleranceConfig::default();
        let mut sys = path_system();
        sys.i_even[1] = 0;
        let mu = DiscreteMarginal::uniform(2, r(1, 1));
        assert!(matches!(reconstruct(&sys, &mu, &mu, &tol), Err(Error::InvalidSystem(_))));
    }

    #[test]
    fn two_limb_examples() {
        let diag = SupportGraph::new(3, 3, [(0, 0), (1, 1), (2, 2)]).unwrap();
        let maps = two_limb_check(&diag).unwrap();
        assert_eq!(maps.f1, PartialMap::identity(3));
        assert!(maps.f2.is_empty());

        // row 1 meets columns 0 and 1, each of degree two
        let s = SupportGraph::new(3, 2, [(0, 0), (1, 0), (1, 1), (2, 1)]).unwrap();
        assert!(two_limb_check(&s).is_none());

        // a star into column 0 plus single-edge columns hanging off row 0
        let s = SupportGraph::new(2, 3, [(0, 0), (1, 0), (0, 1), (0, 2)]).unwrap();
        let maps = two_limb_check(&s).unwrap();
        assert_eq!(maps.f2.pairs().collect::<Vec<_>>(), [(1, 0), (2, 0)]);
        let sys = maps.to_system();
        assert!(validate_system(&sys).is_valid());
        assert_eq!(sys.support().unwrap(), s);
    }
}
