use super::tree::{northwest_corner, RootedTree};
use super::{check_problem, DualPotentials, SolveReport, TransportSolver};
use crate::error::{Error, Result};
use crate::measure::{Coupling, CostMatrix, DiscreteMarginal, ToleranceConfig};
use crate::scalar::Scalar;

/// Primal network simplex on the complete bipartite graph.
///
/// Starts from the northwest-corner basis and pivots with Bland's rule:
/// the entering cell is the lowest-indexed cell with negative reduced cost,
/// and ties in the ratio test leave by lowest index. Degenerate basic cells
/// stay in the basis at zero but are dropped from the reported coupling.
#[derive(Debug, Clone)]
pub struct NetworkSimplex {
    pub max_pivots: usize,
}

impl Default for NetworkSimplex {
    fn default() -> Self {
        Self { max_pivots: 50_000_000 }
    }
}

impl<T: Scalar> TransportSolver<T> for NetworkSimplex {
    fn name(&self) -> &'static str {
        "network-simplex"
    }

    fn solve(
        &self,
        mu: &DiscreteMarginal<T>,
        nu: &DiscreteMarginal<T>,
        cost: &CostMatrix<T>,
        tol: &ToleranceConfig,
    ) -> Result<SolveReport<T>> {
        check_problem(mu, nu, Some(cost), tol)?;
        let (m, n) = (mu.len(), nu.len());
        let eps_cost = T::tolerance(tol.eps_cost);

        let mut flow = vec![T::zero(); m * n];
        let mut in_basis = vec![false; m * n];
        let mut basis = Vec::with_capacity(m + n - 1);
        for (cell, x) in northwest_corner(mu, nu) {
            flow[cell] = x;
            in_basis[cell] = true;
            basis.push(cell);
        }

        let mut iterations = 0;
        let (q, r) = loop {
            let tree = RootedTree::build(m, n, basis.iter().copied()).expect("basis stays a spanning tree");
            let (q, r) = tree.potentials(cost);
            let entering = (0..m * n).find(|&cell| {
                !in_basis[cell] && {
                    let (i, j) = (cell / n, cell % n);
                    cost.get(i, j).clone() - q[i].clone() - r[j].clone() < -eps_cost.clone()
                }
            });
            let Some(entering) = entering else {
                break (q, r);
            };
            if iterations == self.max_pivots {
                return Err(Error::IterationLimit(iterations));
            }
            iterations += 1;

            let (i, j) = (entering / n, entering % n);
            let path = tree.path_col_to_row(j, i);
            let theta = path
                .iter()
                .step_by(2)
                .map(|&cell| flow[cell].clone())
                .reduce(T::min_val)
                .expect("cycle has a decreasing cell");
            let leaving = path
                .iter()
                .step_by(2)
                .copied()
                .filter(|&cell| flow[cell] == theta)
                .min()
                .expect("minimum is attained");

            for (k, &cell) in path.iter().enumerate() {
                flow[cell] = if k % 2 == 0 {
                    flow[cell].clone() - theta.clone()
                } else {
                    flow[cell].clone() + theta.clone()
                };
            }
            flow[entering] = theta;
            flow[leaving] = T::zero();
            in_basis[entering] = true;
            in_basis[leaving] = false;
            let slot = basis.iter().position(|&c| c == leaving).expect("leaving cell is basic");
            basis[slot] = entering;
        };

        let eps_mass = T::tolerance(tol.eps_mass);
        let coupling = Coupling::from_entries(
            m,
            n,
            basis
                .iter()
                .filter(|&&cell| flow[cell] > eps_mass)
                .map(|&cell| (cell / n, cell % n, flow[cell].clone())),
        )?;
        let primal_value: T = basis
            .iter()
            .map(|&cell| cost.get(cell / n, cell % n).clone() * flow[cell].clone())
            .sum();
        let potentials = DualPotentials { q, r };
        let dual_value = potentials.value(mu, nu);
        Ok(SolveReport {
            coupling,
            potentials,
            primal_value,
            dual_value,
            iterations,
        })
    }
}
