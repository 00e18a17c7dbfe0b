//! Independent oracle: enumerate the basic feasible solutions of the
//! transportation polytope restricted to the finite-cost mask and take the
//! best one. Exponential, so guarded to tiny instances; the solver is tested
//! against it, never the other way around.

use ndarray::Array2;

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::marginal::Marginal;
use crate::plan::TransportPlan;
use crate::solver::simplex::UnionFind;

/// Largest `m·n` accepted before enumeration is refused.
pub const BRUTE_FORCE_CELL_LIMIT: usize = 20;

#[derive(Debug, Clone)]
pub struct BruteForceResult {
    pub plan: TransportPlan,
    pub value: f64,
}

/// Exact optimum by enumerating spanning-forest bases of the bipartite graph
/// restricted to the mask, evaluating the unique flow of each, and returning
/// the minimum.
pub fn brute_force_solve(mu: &Marginal, nu: &Marginal, c: &CostMatrix) -> Result<BruteForceResult> {
    let (m, n) = (mu.len(), nu.len());
    if c.rows() != m || c.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "cost is {}x{}, marginals are {m}x{n}",
            c.rows(),
            c.cols()
        )));
    }
    if m * n > BRUTE_FORCE_CELL_LIMIT {
        return Err(Error::InstanceTooLarge {
            cells: m * n,
            limit: BRUTE_FORCE_CELL_LIMIT,
        });
    }

    // cells on zero-mass rows or columns can only ever carry zero flow
    let cells: Vec<(usize, usize)> = c
        .finite_cells()
        .filter(|&(i, j)| mu.weight(i) > 0.0 && nu.weight(j) > 0.0)
        .collect();
    let max_edges = m + n - 1;

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut chosen: Vec<usize> = Vec::with_capacity(max_edges);
    enumerate_forests(
        &cells,
        0,
        max_edges,
        m,
        n,
        &mut chosen,
        &mut |forest: &[usize]| {
            if let Some(flows) = forest_flow(forest, &cells, mu, nu) {
                let value: f64 = forest
                    .iter()
                    .zip(flows.iter())
                    .map(|(&e, &f)| f * c.at(cells[e].0, cells[e].1).value())
                    .sum();
                let better = match &best {
                    None => true,
                    Some((v, _)) => value < *v,
                };
                if better {
                    let mut full = vec![0.0; m * n];
                    for (&e, &f) in forest.iter().zip(flows.iter()) {
                        let (i, j) = cells[e];
                        full[i * n + j] = f;
                    }
                    best = Some((value, full));
                }
            }
        },
    );

    let (value, flat) = best.ok_or(Error::InfeasibleMask)?;
    let mass = Array2::from_shape_vec((m, n), flat).map_err(|e| Error::Numerical(e.to_string()))?;
    let plan = TransportPlan::new(mass, mu, nu, 1e-9)?;
    Ok(BruteForceResult { plan, value })
}

/// Visits every subset of `cells` (in index order) whose bipartite skeleton
/// is a forest of at most `max_edges` edges.
fn enumerate_forests(
    cells: &[(usize, usize)],
    start: usize,
    max_edges: usize,
    m: usize,
    n: usize,
    chosen: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    visit(chosen);
    if chosen.len() == max_edges {
        return;
    }
    for e in start..cells.len() {
        // rebuild the union-find for the current prefix plus e; depth is tiny
        let mut uf = UnionFind::new(m + n);
        let mut acyclic = true;
        for &p in chosen.iter() {
            uf.union(cells[p].0, m + cells[p].1);
        }
        if !uf.union(cells[e].0, m + cells[e].1) {
            acyclic = false;
        }
        if acyclic {
            chosen.push(e);
            enumerate_forests(cells, e + 1, max_edges, m, n, chosen, visit);
            chosen.pop();
        }
    }
}

/// Unique flow carried by a forest, if it satisfies both marginals and is
/// nonnegative. Leaf elimination: a degree-one node pins its incident edge.
fn forest_flow(
    forest: &[usize],
    cells: &[(usize, usize)],
    mu: &Marginal,
    nu: &Marginal,
) -> Option<Vec<f64>> {
    const EPS: f64 = 1e-12;
    let (m, n) = (mu.len(), nu.len());
    let nodes = m + n;
    let mut remaining: Vec<f64> = (0..m)
        .map(|i| mu.weight(i))
        .chain((0..n).map(|j| nu.weight(j)))
        .collect();
    let mut degree = vec![0usize; nodes];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (k, &e) in forest.iter().enumerate() {
        let (i, j) = cells[e];
        degree[i] += 1;
        degree[m + j] += 1;
        incident[i].push(k);
        incident[m + j].push(k);
    }

    let mut flows = vec![f64::NAN; forest.len()];
    let mut done = vec![false; forest.len()];
    let mut queue: Vec<usize> = (0..nodes).filter(|&u| degree[u] == 1).collect();
    while let Some(u) = queue.pop() {
        if degree[u] != 1 {
            continue;
        }
        let k = *incident[u]
            .iter()
            .find(|&&k| !done[k])
            .expect("degree-one node has an open edge");
        let (i, j) = cells[forest[k]];
        let other = if u == i { m + j } else { i };
        let f = remaining[u];
        if f < -EPS {
            return None;
        }
        flows[k] = f.max(0.0);
        done[k] = true;
        remaining[u] = 0.0;
        remaining[other] -= f;
        degree[u] -= 1;
        degree[other] -= 1;
        if degree[other] == 1 {
            queue.push(other);
        }
    }

    // forests leave no edge unresolved; any residual mass means infeasible
    if done.iter().any(|&d| !d) {
        return None;
    }
    if remaining.iter().any(|&r| r.abs() > EPS) {
        return None;
    }
    Some(flows)
}
