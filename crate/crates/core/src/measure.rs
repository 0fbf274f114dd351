//! Marginals, costs, couplings and the push-forward construction.
//!
//! Couplings are stored as sparse triplets in canonical row-major order
//! with duplicates merged, so two couplings are equal as measures exactly
//! when they are equal as values.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Mass and cost thresholds shared by every operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    pub eps_mass: f64,
    pub eps_cost: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eps_mass: 1e-12,
            eps_cost: 1e-9,
        }
    }
}

impl ToleranceConfig {
    pub fn new(eps_mass: f64, eps_cost: f64) -> Result<Self> {
        if !(eps_mass > 0.0 && eps_mass.is_finite()) || !(eps_cost > 0.0 && eps_cost.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "tolerances must be positive and finite (eps_mass = {eps_mass}, eps_cost = {eps_cost})"
            )));
        }
        Ok(Self { eps_mass, eps_cost })
    }
}

/// Nonnegative weights on the points `0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMarginal<T> {
    weights: Vec<T>,
    pub label: Option<String>,
}

impl<T: Scalar> DiscreteMarginal<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("a marginal needs at least one point".into()));
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite_val() {
                return Err(Error::InvalidInput(format!("weight {i} is not finite")));
            }
            if *w < T::zero() {
                return Err(Error::InvalidInput(format!("weight {i} is negative ({w})")));
            }
        }
        Ok(Self { weights, label: None })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            weights: vec![T::zero(); len],
            label: None,
        }
    }

    pub fn uniform(len: usize, total: T) -> Self {
        let each = total / T::from_ratio(len as i64, 1);
        Self {
            weights: vec![each; len],
            label: None,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> &T {
        &self.weights[i]
    }

    pub fn total(&self) -> T {
        self.weights.iter().cloned().sum()
    }

    /// Largest per-entry deviation from `other`, as a double.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a.clone() - b.clone()).abs_val().to_f64())
            .fold(0.0, f64::max)
    }
}

/// Dense row-major cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> CostMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("cost matrix must be non-empty".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "cost matrix of shape {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|c| !c.is_finite_val()) {
            return Err(Error::InvalidInput(format!(
                "cost entry ({}, {}) is not finite",
                k / cols,
                k % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!(
                "cost row {bad} has {} entries, expected {n}",
                rows[bad].len()
            )));
        }
        Self::new(m, n, rows.into_iter().flatten().collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// A sparse nonnegative measure on the grid `m x n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling<T> {
    m: usize,
    n: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> Coupling<T> {
    /// Builds a coupling, merging duplicate cells and dropping exact zeros.
    pub fn from_entries(m: usize, n: usize, entries: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidInput("coupling dimensions must be positive".into()));
        }
        let mut cells: BTreeMap<(usize, usize), T> = BTreeMap::new();
        for (i, j, mass) in entries {
            if i >= m || j >= n {
                return Err(Error::InvalidInput(format!("cell ({i}, {j}) outside the {m}x{n} grid")));
            }
            if !mass.is_finite_val() || mass < T::zero() {
                return Err(Error::InvalidInput(format!("cell ({i}, {j}) has invalid mass {mass}")));
            }
            let slot = cells.entry((i, j)).or_insert_with(T::zero);
            *slot = slot.clone() + mass;
        }
        let entries = cells
            .into_iter()
            .filter(|(_, mass)| *mass > T::zero())
            .map(|((i, j), mass)| (i, j, mass))
            .collect();
        Ok(Self { m, n, entries })
    }

    pub fn empty(m: usize, n: usize) -> Self {
        Self { m, n, entries: Vec::new() }
    }

    /// Dense constructor; entries at or below zero are skipped.
    pub fn from_dense(m: usize, n: usize, dense: &[T]) -> Result<Self> {
        if dense.len() != m * n {
            return Err(Error::Dimension {
                context: "dense coupling",
                expected: (m, n),
                found: (dense.len(), 1),
            });
        }
        Self::from_entries(
            m,
            n,
            dense
                .iter()
                .enumerate()
                .filter(|(_, v)| **v > T::zero())
                .map(|(k, v)| (k / n, k % n, v.clone())),
        )
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn entries(&self) -> &[(usize, usize, T)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mass(&self, i: usize, j: usize) -> T {
        self.entries
            .binary_search_by(|(a, b, _)| (*a, *b).cmp(&(i, j)))
            .map(|k| self.entries[k].2.clone())
            .unwrap_or_else(|_| T::zero())
    }

    pub fn total(&self) -> T {
        self.entries.iter().map(|e| e.2.clone()).sum()
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut dense = vec![T::zero(); self.m * self.n];
        for (i, j, mass) in &self.entries {
            dense[i * self.n + j] = mass.clone();
        }
        dense
    }

    /// Entries kept by `keep`, as a new coupling.
    pub fn filtered(&self, mut keep: impl FnMut(usize, usize, &T) -> bool) -> Self {
        Self {
            m: self.m,
            n: self.n,
            entries: self.entries.iter().filter(|(i, j, v)| keep(*i, *j, v)).cloned().collect(),
        }
    }

    /// Pointwise sum of two couplings of the same shape.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        check_same_shape("coupling sum", self, other)?;
        Self::from_entries(self.m, self.n, self.entries.iter().chain(&other.entries).cloned())
    }

    /// Multiplies every mass by a positive factor.
    pub fn scaled(&self, factor: &T) -> Result<Self> {
        Self::from_entries(
            self.m,
            self.n,
            self.entries.iter().map(|(i, j, v)| (*i, *j, v.clone() * factor.clone())),
        )
    }

    pub fn cost(&self, c: &CostMatrix<T>) -> T {
        self.entries.iter().map(|(i, j, v)| c.get(*i, *j).clone() * v.clone()).sum()
    }

    /// Maps every mass into another numeric backend.
    pub fn convert<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Result<Coupling<U>> {
        Coupling::from_entries(self.m, self.n, self.entries.iter().map(|(i, j, v)| (*i, *j, f(v))))
    }
}

fn check_same_shape<T: Scalar>(context: &'static str, a: &Coupling<T>, b: &Coupling<T>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension {
            context,
            expected: a.shape(),
            found: b.shape(),
        });
    }
    Ok(())
}

/// A map from `0..domain_size` into `0..codomain_size`, undefined off its domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialMap {
    targets: Vec<Option<usize>>,
    codomain_size: usize,
}

impl PartialMap {
    pub fn new(targets: Vec<Option<usize>>, codomain_size: usize) -> Result<Self> {
        if let Some((x, y)) = targets
            .iter()
            .enumerate()
            .find_map(|(x, t)| t.filter(|y| *y >= codomain_size).map(|y| (x, y)))
        {
            return Err(Error::InvalidInput(format!(
                "map sends {x} to {y}, outside a codomain of size {codomain_size}"
            )));
        }
        Ok(Self { targets, codomain_size })
    }

    pub fn empty(domain_size: usize, codomain_size: usize) -> Self {
        Self {
            targets: vec![None; domain_size],
            codomain_size,
        }
    }

    pub fn from_pairs(
        domain_size: usize,
        codomain_size: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut targets = vec![None; domain_size];
        for (x, y) in pairs {
            let slot = targets
                .get_mut(x)
                .ok_or_else(|| Error::InvalidInput(format!("map point {x} outside a domain of size {domain_size}")))?;
            match slot {
                Some(prev) if *prev != y => {
                    return Err(Error::InvalidInput(format!("map is multivalued at {x} ({prev} and {y})")));
                }
                _ => *slot = Some(y),
            }
        }
        Self::new(targets, codomain_size)
    }

    pub fn identity(size: usize) -> Self {
        Self {
            targets: (0..size).map(Some).collect(),
            codomain_size: size,
        }
    }

    pub fn domain_size(&self) -> usize {
        self.targets.len()
    }

    pub fn codomain_size(&self) -> usize {
        self.codomain_size
    }

    pub fn get(&self, x: usize) -> Option<usize> {
        self.targets.get(x).copied().flatten()
    }

    pub fn set(&mut self, x: usize, y: usize) {
        self.targets[x] = Some(y);
    }

    /// `(x, f(x))` for every `x` in the domain, in increasing `x`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.targets.iter().enumerate().filter_map(|(x, t)| t.map(|y| (x, y)))
    }

    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs().map(|(x, _)| x)
    }

    pub fn range(&self) -> Vec<usize> {
        let mut range: Vec<usize> = self.pairs().map(|(_, y)| y).collect();
        range.sort_unstable();
        range.dedup();
        range
    }

    pub fn is_empty(&self) -> bool {
        self.targets.iter().all(Option::is_none)
    }

    pub fn domain_len(&self) -> usize {
        self.pairs().count()
    }
}

/// Horizontal and vertical marginals of `gamma`.
pub fn marginals_of<T: Scalar>(gamma: &Coupling<T>) -> (DiscreteMarginal<T>, DiscreteMarginal<T>) {
    let mut rows = vec![T::zero(); gamma.m];
    let mut cols = vec![T::zero(); gamma.n];
    for (i, j, mass) in &gamma.entries {
        rows[*i] = rows[*i].clone() + mass.clone();
        cols[*j] = cols[*j].clone() + mass.clone();
    }
    (
        DiscreteMarginal { weights: rows, label: None },
        DiscreteMarginal { weights: cols, label: None },
    )
}

/// Whether `gamma` has marginals `mu` and `nu`, entrywise within `eps_mass`.
pub fn validate_coupling<T: Scalar>(
    gamma: &Coupling<T>,
    mu: &DiscreteMarginal<T>,
    nu: &DiscreteMarginal<T>,
    tol: &ToleranceConfig,
) -> Result<bool> {
    if gamma.shape() != (mu.len(), nu.len()) {
        return Err(Error::Dimension {
            context: "coupling against marginals",
            expected: (mu.len(), nu.len()),
            found: gamma.shape(),
        });
    }
    let (rows, cols) = marginals_of(gamma);
    let eps = T::tolerance(tol.eps_mass);
    let within = |a: &[T], b: &[T]| a.iter().zip(b).all(|(x, y)| (x.clone() - y.clone()).abs_val() <= eps);
    Ok(within(rows.weights(), mu.weights()) && within(cols.weights(), nu.weights()))
}

/// The coupling `(id x f)_# eta`: mass `eta_i` placed at `(i, f(i))`.
pub fn pushforward_graph<T: Scalar>(
    f: &PartialMap,
    eta: &DiscreteMarginal<T>,
    tol: &ToleranceConfig,
) -> Result<Coupling<T>> {
    let cells = push_cells(f, eta, tol)?;
    Coupling::from_entries(eta.len(), f.codomain_size(), cells)
}

/// The coupling `(g x id)_# eta` for a map `g` from columns to rows: mass
/// `eta_j` placed at `(g(j), j)`.
pub fn pushforward_antigraph<T: Scalar>(
    g: &PartialMap,
    eta: &DiscreteMarginal<T>,
    tol: &ToleranceConfig,
) -> Result<Coupling<T>> {
    let cells = push_cells(g, eta, tol)?;
    Coupling::from_entries(g.codomain_size(), eta.len(), cells.into_iter().map(|(j, i, v)| (i, j, v)))
}

fn push_cells<T: Scalar>(
    f: &PartialMap,
    eta: &DiscreteMarginal<T>,
    tol: &ToleranceConfig,
) -> Result<Vec<(usize, usize, T)>> {
    if f.domain_size() != eta.len() {
        return Err(Error::Dimension {
            context: "push-forward",
            expected: (f.domain_size(), 1),
            found: (eta.len(), 1),
        });
    }
    if f.codomain_size() == 0 {
        return Err(Error::InvalidInput("push-forward into an empty codomain".into()));
    }
    let eps = T::tolerance(tol.eps_mass);
    let mut cells = Vec::new();
    for (x, w) in eta.weights().iter().enumerate() {
        match f.get(x) {
            Some(y) => cells.push((x, y, w.clone())),
            None if *w > eps => {
                return Err(Error::OutsideDomain {
                    index: x,
                    weight: w.to_f64(),
                })
            }
            None => {}
        }
    }
    Ok(cells)
}

/// Total variation distance `sum |a - b|` over all cells.
pub fn tv_distance<T: Scalar>(a: &Coupling<T>, b: &Coupling<T>) -> Result<T> {
    check_same_shape("total variation", a, b)?;
    let mut total = T::zero();
    let (mut p, mut q) = (a.entries.iter().peekable(), b.entries.iter().peekable());
    loop {
        match (p.peek(), q.peek()) {
            (Some(x), Some(y)) => {
                let (kx, ky) = ((x.0, x.1), (y.0, y.1));
                if kx == ky {
                    total = total + (x.2.clone() - y.2.clone()).abs_val();
                    p.next();
                    q.next();
                } else if kx < ky {
                    total = total + x.2.clone();
                    p.next();
                } else {
                    total = total + y.2.clone();
                    q.next();
                }
            }
            (Some(x), None) => {
                total = total + x.2.clone();
                p.next();
            }
            (None, Some(y)) => {
                total = total + y.2.clone();
                q.next();
            }
            (None, None) => break,
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn diagonal(n: usize) -> Coupling<Rational> {
        Coupling::from_entries(n, n, (0..n).map(|i| (i, i, r(1, n as i64)))).unwrap()
    }

    #[test]
    fn marginals_of_diagonal_are_uniform() {
        let (a, b) = marginals_of(&diagonal(3));
        assert_eq!(a.weights(), &[r(1, 3), r(1, 3), r(1, 3)]);
        assert_eq!(b, a);
    }

    #[test]
    fn marginals_of_empty_coupling_are_zero() {
        let (a, b) = marginals_of(&Coupling::<f64>::empty(2, 3));
        assert_eq!(a.weights(), &[0.0, 0.0]);
        assert_eq!(b.weights(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn marginals_of_small_coupling() {
        let g = Coupling::from_entries(2, 2, [(0, 0, r(1, 10)), (0, 1, r(3, 10)), (1, 1, r(6, 10))]).unwrap();
        let (a, b) = marginals_of(&g);
        assert_eq!(a.weights(), &[r(4, 10), r(6, 10)]);
        assert_eq!(b.weights(), &[r(1, 10), r(9, 10)]);
    }

    #[test]
    fn validate_coupling_cases() {
        let tol = ToleranceConfig::default();
        let g = diagonal(3);
        let uniform = DiscreteMarginal::uniform(3, r(1, 1));
        let point = DiscreteMarginal::new(vec![r(1, 1), r(0, 1), r(0, 1)]).unwrap();
        assert!(validate_coupling(&g, &uniform, &uniform, &tol).unwrap());
        assert!(!validate_coupling(&g, &uniform, &point, &tol).unwrap());
        let short = DiscreteMarginal::uniform(2, r(1, 1));
        match validate_coupling(&g, &uniform, &short, &tol) {
            Err(Error::Dimension { expected, found, .. }) => {
                assert_eq!(expected, (3, 2));
                assert_eq!(found, (3, 3));
            }
            other => panic!("expected a dimension error, got {other:?}"),
        }
    }

    #[test]
    fn product_coupling_is_feasible() {
        let tol = ToleranceConfig::default();
        let mu = DiscreteMarginal::new(vec![r(1, 5), r(4, 5)]).unwrap();
        let nu = DiscreteMarginal::new(vec![r(1, 2), r(1, 3), r(1, 6)]).unwrap();
        let product = Coupling::from_entries(
            2,
            3,
            (0..2).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| (i, j, mu.weight(i).clone() * nu.weight(j).clone())),
        )
        .unwrap();
        assert!(validate_coupling(&product, &mu, &nu, &tol).unwrap());
    }

    #[test]
    fn pushforward_graph_cases() {
        let tol = ToleranceConfig::default();
        let eta = DiscreteMarginal::uniform(3, r(1, 1));
        assert_eq!(pushforward_graph(&PartialMap::identity(3), &eta, &tol).unwrap(), diagonal(3));

        let nowhere = PartialMap::empty(2, 2);
        let zero = DiscreteMarginal::<Rational>::zeros(2);
        assert!(pushforward_graph(&nowhere, &zero, &tol).unwrap().is_empty());

        let f = PartialMap::from_pairs(2, 2, [(0, 1), (1, 1)]).unwrap();
        let eta = DiscreteMarginal::new(vec![r(1, 4), r(3, 4)]).unwrap();
        let g = pushforward_graph(&f, &eta, &tol).unwrap();
        assert_eq!(g.entries(), &[(0, 1, r(1, 4)), (1, 1, r(3, 4))]);
        assert_eq!(marginals_of(&g).1.weights(), &[r(0, 1), r(1, 1)]);
    }

    #[test]
    fn pushforward_rejects_mass_off_domain() {
        let tol = ToleranceConfig::default();
        let f = PartialMap::from_pairs(3, 2, [(0, 1)]).unwrap();
        let eta = DiscreteMarginal::new(vec![0.5, 0.0, 0.5]).unwrap();
        match pushforward_graph(&f, &eta, &tol) {
            Err(Error::OutsideDomain { index, .. }) => assert_eq!(index, 2),
            other => panic!("expected OutsideDomain, got {other:?}"),
        }
        // dust below eps_mass is ignored
        let eta = DiscreteMarginal::new(vec![0.5, 1e-15, 0.0]).unwrap();
        assert_eq!(pushforward_graph(&f, &eta, &tol).unwrap().len(), 1);
    }

    #[test]
    fn pushforward_antigraph_cases() {
        let tol = ToleranceConfig::default();
        let eta = DiscreteMarginal::uniform(3, r(1, 1));
        assert_eq!(pushforward_antigraph(&PartialMap::identity(3), &eta, &tol).unwrap(), diagonal(3));

        let g = PartialMap::from_pairs(2, 1, [(1, 0)]).unwrap();
        let eta = DiscreteMarginal::new(vec![r(0, 1), r(1, 2)]).unwrap();
        let gamma = pushforward_antigraph(&g, &eta, &tol).unwrap();
        assert_eq!(gamma.shape(), (1, 2));
        assert_eq!(gamma.entries(), &[(0, 1, r(1, 2))]);

        let empty = PartialMap::empty(2, 2);
        assert!(pushforward_antigraph(&empty, &DiscreteMarginal::<Rational>::zeros(2), &tol).unwrap().is_empty());
    }

    #[test]
    fn tv_distance_cases() {
        let d = diagonal(3);
        let anti = Coupling::from_entries(3, 3, (0..3).map(|i| (i, 2 - i, r(1, 3)))).unwrap();
        assert_eq!(tv_distance(&d, &d).unwrap(), r(0, 1));
        // the two share the centre cell (1, 1)
        assert_eq!(tv_distance(&d, &anti).unwrap(), r(4, 3));
        let shifted = Coupling::from_entries(3, 3, (0..3).map(|i| (i, (i + 1) % 3, r(1, 3)))).unwrap();
        assert_eq!(tv_distance(&d, &shifted).unwrap(), r(2, 1));
        assert_eq!(tv_distance(&d, &Coupling::empty(3, 3)).unwrap(), d.total());
        assert!(tv_distance(&d, &Coupling::empty(2, 3)).is_err());
    }

    #[test]
    fn duplicates_merge_and_zeros_drop() {
        let g = Coupling::from_entries(2, 2, [(1, 0, 0.25), (0, 1, 0.0), (1, 0, 0.25)]).unwrap();
        assert_eq!(g.entries(), &[(1, 0, 0.5)]);
        assert!(Coupling::from_entries(2, 2, [(2, 0, 1.0)]).is_err());
        assert!(Coupling::from_entries(2, 2, [(0, 0, -1.0)]).is_err());
        assert!(Coupling::from_entries(2, 2, [(0, 0, f64::NAN)]).is_err());
    }

    #[test]
    fn marginal_rejects_bad_weights() {
        assert!(DiscreteMarginal::new(vec![1.0, -0.1]).is_err());
        assert!(DiscreteMarginal::new(vec![f64::INFINITY]).is_err());
        assert!(DiscreteMarginal::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn partial_map_rejects_multivalued() {
        assert!(PartialMap::from_pairs(2, 2, [(0, 0), (0, 1)]).is_err());
        assert!(PartialMap::from_pairs(2, 2, [(0, 2)]).is_err());
    }
}
