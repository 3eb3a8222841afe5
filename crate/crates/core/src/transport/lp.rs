//! Transportation simplex: north-west corner start, potentials on the basis
//! tree, Dantzig pricing, Bland's rule once pivots stall.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct TransportSolution {
    /// Flow on every cell, row-major `m x k`.
    pub flow: Vec<f64>,
    pub cost: f64,
    /// Dual potentials with `u_i + v_j <= c_ij`, equality on the basis.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub pivots: usize,
}

struct Basis {
    m: usize,
    k: usize,
    /// Basic cells `(i, j, flow)`.
    cells: Vec<(usize, usize, f64)>,
}

impl Basis {
    fn north_west(supply: &[f64], demand: &[f64]) -> Self {
        let (m, k) = (supply.len(), demand.len());
        let mut s = supply.to_vec();
        let mut t = demand.to_vec();
        let mut cells = Vec::with_capacity(m + k - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let x = s[i].min(t[j]);
            cells.push((i, j, x));
            s[i] -= x;
            t[j] -= x;
            if i == m - 1 && j == k - 1 {
                break;
            }
            if i == m - 1 {
                j += 1;
            } else if j == k - 1 || s[i] <= t[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
        // rounding leftovers land on the last cell
        let last = cells.len() - 1;
        cells[last].2 += s[m - 1].max(0.0).min(t[k - 1].max(0.0));
        Self { m, k, cells }
    }

    /// Adjacency of the basis tree; nodes `0..m` are rows, `m..m+k` columns.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.m + self.k];
        for (e, &(i, j, _)) in self.cells.iter().enumerate() {
            adj[i].push((self.m + j, e));
            adj[self.m + j].push((i, e));
        }
        adj
    }

    fn potentials(&self, cost: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let adj = self.adjacency();
        let n = self.m + self.k;
        let mut pot = vec![f64::NAN; n];
        let mut queue = VecDeque::new();
        for root in 0..n {
            if !pot[root].is_nan() {
                continue;
            }
            pot[root] = 0.0;
            queue.push_back(root);
            while let Some(a) = queue.pop_front() {
                for &(b, e) in &adj[a] {
                    if pot[b].is_nan() {
                        let (i, j, _) = self.cells[e];
                        let c = cost[i * self.k + j];
                        pot[b] = c - pot[a];
                        queue.push_back(b);
                    }
                }
            }
        }
        (pot[..self.m].to_vec(), pot[self.m..].to_vec())
    }

    /// Basis edges on the tree path from row `i` to column `j`, in order.
    fn path(&self, i: usize, j: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let n = self.m + self.k;
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        let target = self.m + j;
        let mut queue = VecDeque::from([i]);
        seen[i] = true;
        while let Some(a) = queue.pop_front() {
            if a == target {
                break;
            }
            for &(b, e) in &adj[a] {
                if !seen[b] {
                    seen[b] = true;
                    prev[b] = Some((a, e));
                    queue.push_back(b);
                }
            }
        }
        let mut edges = Vec::new();
        let mut cur = target;
        while cur != i {
            let (a, e) = prev[cur].expect("the basis spans every node");
            edges.push(e);
            cur = a;
        }
        edges.reverse();
        edges
    }
}

/// Minimizes `sum c_ij x_ij` over `x >= 0` with row sums `supply` and column
/// sums `demand`. Both must be nonempty, nonnegative, with equal totals up to
/// rounding (the demand is rescaled to the supply total).
pub fn solve_transport(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<TransportSolution> {
    let (m, k) = (supply.len(), demand.len());
    if m == 0 || k == 0 {
        return Err(Error::EmptySpace);
    }
    if cost.len() != m * k {
        return Err(Error::LengthMismatch {
            what: "cost matrix",
            got: cost.len(),
            expected: m * k,
        });
    }
    let ts: f64 = supply.iter().sum();
    let td: f64 = demand.iter().sum();
    let demand: Vec<f64> = demand.iter().map(|d| d * ts / td).collect();
    let mut basis = Basis::north_west(supply, &demand);
    let cmax = cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let eps = 1e-12 * cmax.max(1.0);
    let mut stall = 0usize;
    let stall_limit = 2 * (m + k);
    let max_pivots = 50 * m * k + 1000;
    let mut pivots = 0;
    loop {
        let (u, v) = basis.potentials(cost);
        let bland = stall >= stall_limit;
        let mut enter: Option<(usize, usize, f64)> = None;
        'scan: for i in 0..m {
            for j in 0..k {
                let r = cost[i * k + j] - u[i] - v[j];
                if r < -eps {
                    if bland {
                        enter = Some((i, j, r));
                        break 'scan;
                    }
                    if enter.map_or(true, |e| r < e.2) {
                        enter = Some((i, j, r));
                    }
                }
            }
        }
        let Some((ei, ej, _)) = enter else {
            let mut flow = vec![0.0; m * k];
            for &(i, j, x) in &basis.cells {
                flow[i * k + j] += x;
            }
            let total = flow.iter().zip(cost).map(|(x, c)| x * c).sum();
            return Ok(TransportSolution {
                flow,
                cost: total,
                u,
                v,
                pivots,
            });
        };
        if pivots >= max_pivots {
            return Err(Error::NonConvergence(format!("transportation simplex exceeded {max_pivots} pivots")));
        }
        pivots += 1;
        // edges on the path from row ei to column ej alternate -, +, -, ... starting at column ej
        let path = basis.path(ei, ej);
        let l = path.len();
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (pos, &e) in path.iter().enumerate() {
            if (l - 1 - pos) % 2 == 0 {
                let (i, j, x) = basis.cells[e];
                let better = x < theta
                    || (x == theta && leave != usize::MAX && {
                        let (li, lj, _) = basis.cells[leave];
                        (i, j) < (li, lj)
                    });
                if better {
                    theta = x;
                    leave = e;
                }
            }
        }
        for (pos, &e) in path.iter().enumerate() {
            if (l - 1 - pos) % 2 == 0 {
                basis.cells[e].2 -= theta;
            } else {
                basis.cells[e].2 += theta;
            }
        }
        basis.cells[leave] = (ei, ej, theta);
        if theta > 0.0 {
            stall = 0;
        } else {
            stall += 1;
        }
    }
}
