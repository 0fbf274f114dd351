//! The Kantorovich transportation problem on finite marginals: primal
//! solvers, dual potentials, c-transforms and the zero set.

mod network_simplex;
mod tree;
mod vertices;

pub use network_simplex::NetworkSimplex;
pub use vertices::{
    enumerate_optimal_vertices, enumerate_vertices, is_unique_optimum, optimal_face_vertices, EnumerationLimits, Vertex,
    VertexEnumeration, FACE_EDGE_LIMIT,
};

use crate::error::{Error, Result};
use crate::extremality::SupportGraph;
use crate::measure::{Coupling, CostMatrix, DiscreteMarginal, ToleranceConfig};
use crate::registry::Registry;
use crate::scalar::Scalar;

/// Kantorovich dual pair: `q` on rows, `r` on columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPotentials<T> {
    pub q: Vec<T>,
    pub r: Vec<T>,
}

impl<T: Scalar> DualPotentials<T> {
    pub fn reduced_cost(&self, c: &CostMatrix<T>, i: usize, j: usize) -> T {
        c.get(i, j).clone() - self.q[i].clone() - self.r[j].clone()
    }

    /// `sum q mu + sum r nu`.
    pub fn value(&self, mu: &DiscreteMarginal<T>, nu: &DiscreteMarginal<T>) -> T {
        let a: T = self.q.iter().zip(mu.weights()).map(|(q, w)| q.clone() * w.clone()).sum();
        let b: T = self.r.iter().zip(nu.weights()).map(|(r, w)| r.clone() * w.clone()).sum();
        a + b
    }

    /// First cell whose reduced cost is below `-eps_cost`, if any.
    pub fn first_violation(&self, c: &CostMatrix<T>, tol: &ToleranceConfig) -> Option<(usize, usize, T)> {
        let eps = T::tolerance(tol.eps_cost);
        (0..c.rows())
            .flat_map(|i| (0..c.cols()).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, self.reduced_cost(c, i, j)))
            .find(|(_, _, red)| *red < -eps.clone())
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub coupling: Coupling<T>,
    pub potentials: DualPotentials<T>,
    pub primal_value: T,
    pub dual_value: T,
    pub iterations: usize,
}

/// A primal solver for the finite transportation problem.
pub trait TransportSolver<T: Scalar>: Send + Sync {
    fn name(&self) -> &'static str;

    fn solve(
        &self,
        mu: &DiscreteMarginal<T>,
        nu: &DiscreteMarginal<T>,
        cost: &CostMatrix<T>,
        tol: &ToleranceConfig,
    ) -> Result<SolveReport<T>>;
}

/// Every solver known to the crate, keyed by name.
pub fn solvers<T: Scalar>() -> Registry<dyn TransportSolver<T>> {
    let mut reg: Registry<dyn TransportSolver<T>> = Registry::new("solver");
    reg.register("network-simplex", Box::new(NetworkSimplex::default()));
    reg.register("enumerate", Box::new(vertices::VertexEnumerator::default()));
    reg
}

/// Solves with the default network simplex.
pub fn solve<T: Scalar>(
    mu: &DiscreteMarginal<T>,
    nu: &DiscreteMarginal<T>,
    cost: &CostMatrix<T>,
    tol: &ToleranceConfig,
) -> Result<SolveReport<T>> {
    NetworkSimplex::default().solve(mu, nu, cost, tol)
}

/// Rejects mismatched shapes and unequal totals.
pub(crate) fn check_problem<T: Scalar>(
    mu: &DiscreteMarginal<T>,
    nu: &DiscreteMarginal<T>,
    cost: Option<&CostMatrix<T>>,
    tol: &ToleranceConfig,
) -> Result<()> {
    if let Some(c) = cost {
        if c.shape() != (mu.len(), nu.len()) {
            return Err(Error::Dimension {
                context: "cost matrix against marginals",
                expected: (mu.len(), nu.len()),
                found: c.shape(),
            });
        }
    }
    let (a, b) = (mu.total(), nu.total());
    let slack = T::tolerance(tol.eps_mass * mu.len().max(nu.len()) as f64);
    if (a.clone() - b.clone()).abs_val() > slack {
        return Err(Error::Unbalanced {
            mu_total: a.to_f64(),
            nu_total: b.to_f64(),
        });
    }
    Ok(())
}

/// Row potential `q[i] = min_j c[i][j] - r[j]`.
pub fn c_transform<T: Scalar>(r: &[T], c: &CostMatrix<T>) -> Result<Vec<T>> {
    if r.len() != c.cols() {
        return Err(Error::Dimension {
            context: "c-transform",
            expected: (c.rows(), c.cols()),
            found: (c.rows(), r.len()),
        });
    }
    Ok((0..c.rows())
        .map(|i| {
            c.row(i)
                .iter()
                .zip(r)
                .map(|(cij, rj)| cij.clone() - rj.clone())
                .reduce(T::min_val)
                .expect("cost matrix has columns")
        })
        .collect())
}

/// Column potential `r[j] = min_i c[i][j] - q[i]`.
pub fn c_transform_cols<T: Scalar>(q: &[T], c: &CostMatrix<T>) -> Result<Vec<T>> {
    if q.len() != c.rows() {
        return Err(Error::Dimension {
            context: "column c-transform",
            expected: (c.rows(), c.cols()),
            found: (q.len(), c.cols()),
        });
    }
    Ok((0..c.cols())
        .map(|j| {
            (0..c.rows())
                .map(|i| c.get(i, j).clone() - q[i].clone())
                .reduce(T::min_val)
                .expect("cost matrix has rows")
        })
        .collect())
}

/// Cells where the reduced cost vanishes (up to `eps_cost`).
pub fn zero_set<T: Scalar>(c: &CostMatrix<T>, p: &DualPotentials<T>, tol: &ToleranceConfig) -> Result<SupportGraph> {
    if p.q.len() != c.rows() || p.r.len() != c.cols() {
        return Err(Error::Dimension {
            context: "zero set",
            expected: c.shape(),
            found: (p.q.len(), p.r.len()),
        });
    }
    if let Some((i, j, red)) = p.first_violation(c, tol) {
        return Err(Error::InfeasiblePotentials {
            i,
            j,
            reduced: red.to_f64(),
        });
    }
    let eps = T::tolerance(tol.eps_cost);
    let edges = (0..c.rows())
        .flat_map(|i| (0..c.cols()).map(move |j| (i, j)))
        .filter(|&(i, j)| p.reduced_cost(c, i, j) <= eps);
    SupportGraph::new(c.rows(), c.cols(), edges)
}
