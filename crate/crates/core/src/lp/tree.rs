//! Spanning-tree bases of the bipartite transportation graph.
//!
//! Nodes `0..m` are rows, `m..m+n` are columns; a cell `(i, j)` is the
//! edge between row `i` and column `j` and has id `i * n + j`.

use std::collections::VecDeque;

use crate::measure::{CostMatrix, DiscreteMarginal};
use crate::scalar::Scalar;

pub(crate) struct RootedTree {
    m: usize,
    n: usize,
    parent: Vec<usize>,
    parent_cell: Vec<usize>,
    depth: Vec<usize>,
    order: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl RootedTree {
    /// Roots the basis at column 0. Returns `None` when the cells do not
    /// form a spanning tree.
    pub fn build(m: usize, n: usize, cells: impl IntoIterator<Item = usize>) -> Option<Self> {
        let nodes = m + n;
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
        let mut edge_count = 0;
        for cell in cells {
            let (i, j) = (cell / n, cell % n);
            adj[i].push((m + j, cell));
            adj[m + j].push((i, cell));
            edge_count += 1;
        }
        if edge_count + 1 != nodes {
            return None;
        }
        let mut parent = vec![NONE; nodes];
        let mut parent_cell = vec![NONE; nodes];
        let mut depth = vec![0; nodes];
        let mut seen = vec![false; nodes];
        let mut order = Vec::with_capacity(nodes);
        let root = m;
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &(v, cell) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = u;
                    parent_cell[v] = cell;
                    depth[v] = depth[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        (order.len() == nodes).then_some(Self {
            m,
            n,
            parent,
            parent_cell,
            depth,
            order,
        })
    }

    /// Cells on the tree path from column `j` to row `i`, listed from the
    /// column end. The path has odd length.
    pub fn path_col_to_row(&self, j: usize, i: usize) -> Vec<usize> {
        let (mut a, mut b) = (self.m + j, i);
        let mut from_a = Vec::new();
        let mut from_b = Vec::new();
        while self.depth[a] > self.depth[b] {
            from_a.push(self.parent_cell[a]);
            a = self.parent[a];
        }
        while self.depth[b] > self.depth[a] {
            from_b.push(self.parent_cell[b]);
            b = self.parent[b];
        }
        while a != b {
            from_a.push(self.parent_cell[a]);
            a = self.parent[a];
            from_b.push(self.parent_cell[b]);
            b = self.parent[b];
        }
        from_a.extend(from_b.into_iter().rev());
        from_a
    }

    /// Potentials with `q[i] + r[j] = c[i][j]` on every tree cell and `r[0] = 0`.
    pub fn potentials<T: Scalar>(&self, cost: &CostMatrix<T>) -> (Vec<T>, Vec<T>) {
        let (m, n) = (self.m, self.n);
        let mut q = vec![T::zero(); m];
        let mut r = vec![T::zero(); n];
        for &u in self.order.iter().skip(1) {
            let cell = self.parent_cell[u];
            let (i, j) = (cell / n, cell % n);
            if u < m {
                q[i] = cost.get(i, j).clone() - r[j].clone();
            } else {
                r[j] = cost.get(i, j).clone() - q[i].clone();
            }
        }
        (q, r)
    }
}

/// Initial basis by the northwest-corner rule: exactly `m + n - 1` cells,
/// degenerate cells carried at zero.
pub(crate) fn northwest_corner<T: Scalar>(mu: &DiscreteMarginal<T>, nu: &DiscreteMarginal<T>) -> Vec<(usize, T)> {
    let (m, n) = (mu.len(), nu.len());
    let mut supply = mu.weights().to_vec();
    let mut demand = nu.weights().to_vec();
    let (mut i, mut j) = (0, 0);
    let steps = m + n - 1;
    let mut cells = Vec::with_capacity(steps);
    for step in 0..steps {
        let row_done = supply[i] <= demand[j];
        let x = supply[i].clone().min_val(demand[j].clone());
        supply[i] = supply[i].clone() - x.clone();
        demand[j] = demand[j].clone() - x.clone();
        if row_done {
            supply[i] = T::zero();
        } else {
            demand[j] = T::zero();
        }
        cells.push((i * n + j, x));
        if step + 1 == steps {
            break;
        }
        if (row_done && i + 1 < m) || j + 1 == n {
            i += 1;
        } else {
            j += 1;
        }
    }
    cells
}
