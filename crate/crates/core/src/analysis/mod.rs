//! Cost-weighted norms, gauge functionals, and Moreau–Yosida regularization
//! at finite scale.

mod gauge;
mod metric;

pub use gauge::{gauge, gauge_sandwich_check, GaugeProbe, SampleBox, SandwichReport};
pub use metric::{
    capped_approximants, envelope_factorization_check, moreau_yosida, ExtFunction,
    FiniteMetricSpace,
};

use ndarray::{Array1, Array2};

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;

/// The cost-weighted sup norm `max_{(i,j) ∈ S} |u_ij| / c_ij`, with the sup
/// restricted to the finite-cost mask. Returns 0 when the mask is empty.
///
/// Meaningful as a norm when the cost is normalized so every finite entry is
/// at least 1; a zero finite cost under a nonzero `u` yields `+∞`.
pub fn cost_norm(u: &Array2<f64>, c: &CostMatrix) -> Result<f64> {
    if u.dim() != (c.rows(), c.cols()) {
        return Err(Error::DimensionMismatch("u and cost shapes differ".into()));
    }
    let mut sup = 0.0f64;
    for (i, j) in c.finite_cells() {
        let num = u[[i, j]].abs();
        if num == 0.0 {
            continue;
        }
        sup = sup.max(num / c.at(i, j).value());
    }
    Ok(sup)
}

/// The dual norm on signed mass matrices: `Σ_{(i,j) ∈ S} c_ij · |ℓ_ij|`.
///
/// Any nonzero entry off the finite-cost mask makes the norm `+∞`: admissible
/// linear forms are supported inside the mask.
pub fn dual_cost_norm(ell: &Array2<f64>, c: &CostMatrix) -> Result<ExtReal> {
    if ell.dim() != (c.rows(), c.cols()) {
        return Err(Error::DimensionMismatch(
            "ell and cost shapes differ".into(),
        ));
    }
    let mut total = 0.0;
    for ((i, j), &v) in ell.indexed_iter() {
        if v.is_nan() {
            return Err(Error::InvalidValue(format!("ell[{i}][{j}] is NaN")));
        }
        if !c.is_finite_at(i, j) {
            if v != 0.0 {
                return Ok(ExtReal::INFINITY);
            }
            continue;
        }
        total += c.at(i, j).value() * v.abs();
    }
    ExtReal::new(total)
}

/// The marginal dual norm: the cheapest total `Σ c |ℓ|` over signed couplings
/// `ℓ` supported on the mask with row marginals `κ₁` and column marginals
/// `κ₂`.
///
/// Splitting `ℓ = p − q` with `p, q ≥ 0` linearizes the absolute value, which
/// makes this a min-cost flow with a forward and a backward arc per mask
/// cell (zero-net nodes still act as transit points). Returns `+∞` when no
/// coupling with the requested marginals fits inside the mask.
pub fn marginal_dual_norm(
    kappa1: &Array1<f64>,
    kappa2: &Array1<f64>,
    c: &CostMatrix,
) -> Result<ExtReal> {
    let (m, n) = (kappa1.len(), kappa2.len());
    if c.rows() != m || c.cols() != n {
        return Err(Error::DimensionMismatch(
            "kappa and cost shapes differ".into(),
        ));
    }
    for (name, v) in [("kappa1", kappa1), ("kappa2", kappa2)] {
        if let Some((i, &bad)) = v.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "{name}[{i}] = {bad} must be finite"
            )));
        }
    }
    let scale = kappa1
        .iter()
        .chain(kappa2.iter())
        .fold(0.0f64, |a, &x| a.max(x.abs()));
    let (s1, s2): (f64, f64) = (kappa1.sum(), kappa2.sum());
    if (s1 - s2).abs() > 1e-9 * (1.0 + scale) {
        return Err(Error::MassMismatch(s1, s2));
    }

    // nodes 0..m rows, m..m+n columns; supplies κ₁ and −κ₂
    let mut supply = vec![0.0; m + n];
    for i in 0..m {
        supply[i] = kappa1[i];
    }
    for j in 0..n {
        supply[m + j] = -kappa2[j];
    }

    use crate::solver::simplex::{EngineArc, NetworkSimplex, UnionFind};
    let cells: Vec<(usize, usize)> = c.finite_cells().collect();
    let mut arcs = Vec::with_capacity(2 * cells.len());
    for &(i, j) in &cells {
        let w = c.at(i, j).value();
        arcs.push(EngineArc {
            from: i,
            to: m + j,
            cost: w,
        }); // forward (p)
        arcs.push(EngineArc {
            from: m + j,
            to: i,
            cost: w,
        }); // backward (q)
    }

    // spanning forest of the mask graph, then the unique tree flow
    let mut uf = UnionFind::new(m + n);
    let mut tree_cells: Vec<usize> = Vec::new();
    for (k, &(i, j)) in cells.iter().enumerate() {
        if uf.union(i, m + j) {
            tree_cells.push(k);
        }
    }
    let bal_tol = 1e-9 * (1.0 + scale);
    let Some(tree_flows) = forest_flows(m, n, &cells, &tree_cells, &supply, bal_tol) else {
        return Ok(ExtReal::INFINITY); // some component cannot balance inside the mask
    };
    let initial: Vec<(usize, f64)> = tree_cells
        .iter()
        .zip(tree_flows.iter())
        .map(|(&k, &f)| {
            if f >= 0.0 {
                (2 * k, f)
            } else {
                (2 * k + 1, -f)
            }
        })
        .collect();

    let max_fin = c.max_finite().unwrap_or(0.0);
    let pivot_tol = 1e-9 * (1.0 + max_fin);
    let max_iters = 10 * (m + n) * (m + n);
    let run = NetworkSimplex::new(m + n, arcs).solve(&initial, pivot_tol, max_iters)?;
    if !run.optimal {
        return Err(Error::Numerical(
            "marginal dual norm solve hit the pivot budget".into(),
        ));
    }
    ExtReal::new(run.objective.max(0.0))
}

/// Net signed flow on each tree cell from leaf elimination, or `None` when
/// some component's supplies do not balance within `tol`. Positive flow runs
/// row → column.
fn forest_flows(
    m: usize,
    n: usize,
    cells: &[(usize, usize)],
    tree_cells: &[usize],
    supply: &[f64],
    tol: f64,
) -> Option<Vec<f64>> {
    let nodes = m + n;
    let ends: Vec<(usize, usize)> = tree_cells
        .iter()
        .map(|&k| (cells[k].0, m + cells[k].1))
        .collect();

    let mut remaining = supply.to_vec();
    let mut degree = vec![0usize; nodes];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (t, &(a, b)) in ends.iter().enumerate() {
        degree[a] += 1;
        degree[b] += 1;
        incident[a].push(t);
        incident[b].push(t);
    }

    let mut flows = vec![0.0f64; ends.len()];
    let mut done = vec![false; ends.len()];
    let mut stack: Vec<usize> = (0..nodes).filter(|&u| degree[u] == 1).collect();
    while let Some(u) = stack.pop() {
        if degree[u] != 1 {
            continue;
        }
        let t = *incident[u]
            .iter()
            .find(|&&t| !done[t])
            .expect("degree-one node has an open tree edge");
        let (a, b) = ends[t];
        let other = if u == a { b } else { a };
        // positive flow is row -> column; a leaf's surplus leaves through it
        let f = remaining[u];
        flows[t] = if u == a { f } else { -f };
        done[t] = true;
        remaining[u] = 0.0;
        remaining[other] += f;
        degree[u] -= 1;
        degree[other] -= 1;
        if degree[other] == 1 {
            stack.push(other);
        }
    }

    if done.iter().any(|&d| !d) {
        return None; // cannot happen on a forest, kept as a guard
    }
    if remaining.iter().any(|&r| r.abs() > tol) {
        return None;
    }
    Some(flows)
}
