//! Transportation problems: a network-simplex specialization and the same
//! problem posed through the generic program interface.

use crate::distributions::Coupling;
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{solve_with, ConicProgram, Method, SolveStatus, SolverSettings};

const MARGINAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution<T> {
    pub value: T,
    pub plan: Coupling<T>,
    pub pivots: usize,
}

fn check_marginals<T: Real>(costs: &[T], supply: &[T], demand: &[T]) -> Result<()> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput("empty marginal".into()));
    }
    if costs.len() != m * n {
        return Err(Error::dim(m * n, costs.len()));
    }
    let tol = T::of(MARGINAL_TOLERANCE);
    for w in [supply, demand] {
        let total: T = w.iter().copied().sum();
        if w.iter().any(|&x| !(x >= T::zero())) || (total - T::one()).abs() > tol {
            return Err(Error::InvalidInput(
                "transport marginals must be nonnegative and sum to 1".into(),
            ));
        }
    }
    if costs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput("non-finite transport cost".into()));
    }
    Ok(())
}

/// Optimal transport between `supply` (rows) and `demand` (columns) for the
/// row-major cost matrix `costs`, by the network simplex on the transportation tree.
pub fn solve_transport<T: Real>(
    costs: &[T],
    supply: &[T],
    demand: &[T],
) -> Result<TransportSolution<T>> {
    check_marginals(costs, supply, demand)?;
    let (m, n) = (supply.len(), demand.len());
    let mut a = supply.to_vec();
    let mut b = demand.to_vec();
    let sa: T = a.iter().copied().sum();
    let sb: T = b.iter().copied().sum();
    b.iter_mut().for_each(|v| *v = *v * sa / sb);

    // Northwest-corner basis with exactly m + n - 1 cells.
    let mut cells: Vec<(usize, usize)> = Vec::with_capacity(m + n - 1);
    let mut flow: Vec<T> = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let x = a[i].min(b[j]).max(T::zero());
        cells.push((i, j));
        flow.push(x);
        a[i] -= x;
        b[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if (a[i] <= b[j] && i < m - 1) || j == n - 1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    if let Some(last) = flow.last_mut() {
        *last += a[m - 1].max(T::zero());
    }

    let scale = costs.iter().fold(T::zero(), |acc, c| acc.max(c.abs()));
    let dtol = T::of(1e-12) * (T::one() + scale);
    let max_pivots = 50 * (m + n) * (m + n) + 1000;
    let mut pivots = 0usize;
    let mut degenerate_run = 0usize;
    let nodes = m + n;
    let mut u = vec![T::zero(); m];
    let mut v = vec![T::zero(); n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    loop {
        for l in adj.iter_mut() {
            l.clear();
        }
        for (k, &(ci, cj)) in cells.iter().enumerate() {
            adj[ci].push(k);
            adj[m + cj].push(k);
        }
        // Potentials u_i + v_j = c_ij on the tree rooted at row 0.
        let mut seen = vec![false; nodes];
        let mut stack = vec![0usize];
        seen[0] = true;
        u[0] = T::zero();
        while let Some(node) = stack.pop() {
            for &k in &adj[node] {
                let (ci, cj) = cells[k];
                let c = costs[ci * n + cj];
                if node < m {
                    if !seen[m + cj] {
                        v[cj] = c - u[ci];
                        seen[m + cj] = true;
                        stack.push(m + cj);
                    }
                } else if !seen[ci] {
                    u[ci] = c - v[cj];
                    seen[ci] = true;
                    stack.push(ci);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::NumericalFailure(
                "transport basis is not a spanning tree".into(),
            ));
        }
        let bland = degenerate_run > 2 * (m + n);
        let mut enter = None;
        let mut best = -dtol;
        'scan: for ri in 0..m {
            for cj in 0..n {
                let d = costs[ri * n + cj] - u[ri] - v[cj];
                if d < best {
                    enter = Some((ri, cj));
                    if bland {
                        break 'scan;
                    }
                    best = d;
                }
            }
        }
        let Some((ei, ej)) = enter else { break };
        if pivots >= max_pivots {
            return Err(Error::NumericalFailure(
                "network simplex pivot limit reached".into(),
            ));
        }
        // Tree path from column node ej back to row node ei.
        let target = ei;
        let start = m + ej;
        let mut parent_edge = vec![usize::MAX; nodes];
        let mut visited = vec![false; nodes];
        let mut stack = vec![start];
        visited[start] = true;
        while let Some(node) = stack.pop() {
            if node == target {
                break;
            }
            for &k in &adj[node] {
                let (ci, cj) = cells[k];
                let other = if node < m { m + cj } else { ci };
                if !visited[other] {
                    visited[other] = true;
                    parent_edge[other] = k;
                    stack.push(other);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = target;
        while node != start {
            let k = parent_edge[node];
            path.push(k);
            let (ci, cj) = cells[k];
            node = if node < m { m + cj } else { ci };
        }
        // Path edges listed from the row end: the first one carries -θ.
        let mut leave: Option<usize> = None;
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 {
                leave = match leave {
                    None => Some(k),
                    Some(l) if flow[k] < flow[l] || (flow[k] == flow[l] && k < l) => Some(k),
                    keep => keep,
                };
            }
        }
        let leave = leave.expect("cycle has a decreasing edge");
        let theta = flow[leave];
        if theta <= T::zero() {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 {
                flow[k] -= theta;
            } else {
                flow[k] += theta;
            }
        }
        cells[leave] = (ei, ej);
        flow[leave] = theta;
        pivots += 1;
    }
    let mut mass = vec![T::zero(); m * n];
    let mut value = T::zero();
    for (k, &(ci, cj)) in cells.iter().enumerate() {
        let x = flow[k].max(T::zero());
        mass[ci * n + cj] += x;
        value += x * costs[ci * n + cj];
    }
    Ok(TransportSolution {
        value,
        plan: Coupling {
            rows: m,
            cols: n,
            mass,
        },
        pivots,
    })
}

/// The same transportation problem solved through [`solve_with`].
pub fn solve_transport_lp<T: Real>(
    costs: &[T],
    supply: &[T],
    demand: &[T],
    method: Method,
) -> Result<TransportSolution<T>> {
    check_marginals(costs, supply, demand)?;
    let (m, n) = (supply.len(), demand.len());
    let mut p = ConicProgram::new();
    for k in 0..m * n {
        let x = p.add_nonneg();
        p.set_objective(x, costs[k]);
    }
    for i in 0..m {
        p.add_eq((0..n).map(|j| (i * n + j, T::one())).collect(), supply[i]);
    }
    for j in 0..n {
        p.add_eq((0..m).map(|i| (i * n + j, T::one())).collect(), demand[j]);
    }
    let settings = SolverSettings {
        tolerance: T::of(1e-10).max(T::default_tolerance()),
        method,
        ..SolverSettings::default()
    };
    let r = solve_with(&p, &settings)?;
    if r.status != SolveStatus::Optimal {
        return Err(Error::SolverFailure(format!(
            "transport program ended with {}",
            r.status
        )));
    }
    Ok(TransportSolution {
        value: r.value,
        plan: Coupling {
            rows: m,
            cols: n,
            mass: r.x.iter().map(|&x| x.max(T::zero())).collect(),
        },
        pivots: r.iterations,
    })
}
