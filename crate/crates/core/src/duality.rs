//! Dual-side computations: dual objective, duality gap, extraction of
//! complementary-slackness potentials from a plan, and strengthening of
//! potentials to the two-sided `|φ⊕ψ| ≤ c` form.

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::marginal::Marginal;
use crate::plan::{plan_cost, TransportPlan, DEFAULT_SUPPORT_THRESHOLD};
use crate::potential::PotentialPair;
use crate::solver::SolveConfig;

/// Primal value, dual value, their gap, and the two dual-feasibility
/// verdicts, all recomputable from the stored inputs.
#[derive(Debug, Clone)]
pub struct DualReport {
    pub dual_value: f64,
    pub primal_value: ExtReal,
    /// `primal − dual`; `+∞` when the primal is infinite.
    pub gap: f64,
    /// `φ_i + ψ_j ≤ c_ij + tol` on every cell (vacuous where `c = ∞`).
    pub feasible_everywhere: bool,
    /// `|φ_i + ψ_j − c_ij| ≤ tol` on every support cell.
    pub tight_on_support: bool,
}

/// The dual objective `Σ_i μ_i φ_i + Σ_j ν_j ψ_j`.
pub fn dual_value(mu: &Marginal, nu: &Marginal, p: &PotentialPair) -> Result<f64> {
    if p.phi().len() != mu.len() || p.psi().len() != nu.len() {
        return Err(Error::DimensionMismatch(format!(
            "potentials are {}x{}, marginals are {}x{}",
            p.phi().len(),
            p.psi().len(),
            mu.len(),
            nu.len()
        )));
    }
    let a: f64 = mu
        .weights()
        .iter()
        .zip(p.phi().iter())
        .map(|(w, f)| w * f)
        .sum();
    let b: f64 = nu
        .weights()
        .iter()
        .zip(p.psi().iter())
        .map(|(w, g)| w * g)
        .sum();
    Ok(a + b)
}

/// Computes primal value, dual value, gap and the feasibility verdicts for a
/// (plan, potentials) bundle. Tolerances come from `cfg`.
pub fn duality_gap(
    mu: &Marginal,
    nu: &Marginal,
    c: &CostMatrix,
    plan: &TransportPlan,
    p: &PotentialPair,
    cfg: &SolveConfig,
) -> Result<DualReport> {
    if plan.rows() != c.rows() || plan.cols() != c.cols() {
        return Err(Error::DimensionMismatch(
            "plan and cost shapes differ".into(),
        ));
    }
    let primal = plan_cost(plan, c)?;
    let dual = dual_value(mu, nu, p)?;
    let gap = if primal.is_finite() {
        primal.value() - dual
    } else {
        f64::INFINITY
    };

    let tol = cfg.tolerance;
    let mut feasible_everywhere = true;
    'outer: for i in 0..c.rows() {
        for j in 0..c.cols() {
            if c.is_finite_at(i, j) && p.sum_at(i, j) > c.at(i, j).value() + tol {
                feasible_everywhere = false;
                break 'outer;
            }
        }
    }
    let mut tight_on_support = true;
    for (i, j) in plan.support(cfg.support_threshold) {
        let target = c.at(i, j);
        if !target.is_finite() || (p.sum_at(i, j) - target.value()).abs() > tol {
            tight_on_support = false;
            break;
        }
    }
    Ok(DualReport {
        dual_value: dual,
        primal_value: primal,
        gap,
        feasible_everywhere,
        tight_on_support,
    })
}

/// Recovers finite potentials that are tight on the plan's support and
/// feasible on the whole finite-cost mask.
///
/// Tight equations are propagated over each connected component of the
/// support graph (gauge: `φ = 0` at the component's lowest row index); the
/// remaining off-support constraints reduce to difference constraints on
/// per-component shifts, solved by shortest paths in the slack graph.
/// Fails with `NotCertifiable` when that system is unsolvable, which is
/// exactly when the plan is not optimal.
pub fn extract_potentials(
    plan: &TransportPlan,
    c: &CostMatrix,
    cfg: &SolveConfig,
) -> Result<PotentialPair> {
    let (m, n) = (plan.rows(), plan.cols());
    if c.rows() != m || c.cols() != n {
        return Err(Error::DimensionMismatch(
            "plan and cost shapes differ".into(),
        ));
    }
    let support = plan.support(cfg.support_threshold);
    for &(i, j) in &support {
        if !c.is_finite_at(i, j) {
            return Err(Error::InfiniteSupportCost(i, j));
        }
    }
    let scale = 1.0 + c.max_finite().unwrap_or(0.0).abs();
    let eq_tol = cfg.tolerance * scale;

    // adjacency of the support graph over nodes 0..m (rows), m..m+n (cols)
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m + n];
    for &(i, j) in &support {
        let w = c.at(i, j).value();
        adj[i].push((m + j, w));
        adj[m + j].push((i, w));
    }

    let mut phi = vec![0.0; m];
    let mut psi = vec![0.0; n];
    let mut touched = vec![false; m + n];
    let mut comp = vec![usize::MAX; m + n];
    let mut comp_count = 0usize;

    // propagate tight equations component by component
    for start in 0..m {
        if touched[start] || adj[start].is_empty() {
            continue;
        }
        let id = comp_count;
        comp_count += 1;
        phi[start] = 0.0;
        touched[start] = true;
        comp[start] = id;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let val_u = if u < m { phi[u] } else { psi[u - m] };
            for &(v, w) in &adj[u] {
                let required = w - val_u;
                if touched[v] {
                    let existing = if v < m { phi[v] } else { psi[v - m] };
                    if (existing - required).abs() > eq_tol {
                        return Err(Error::NotCertifiable(format!(
                            "support cycle forces two values at node {v}: {existing} vs {required}"
                        )));
                    }
                } else {
                    if v < m {
                        phi[v] = required;
                    } else {
                        psi[v - m] = required;
                    }
                    touched[v] = true;
                    comp[v] = id;
                    queue.push_back(v);
                }
            }
        }
    }

    // off-support slack constraints between touched nodes
    let mut slack_edges: Vec<(usize, usize, f64)> = Vec::new();
    for (i, j) in c.finite_cells() {
        if !(touched[i] && touched[m + j]) {
            continue;
        }
        let slack = c.at(i, j).value() - phi[i] - psi[j];
        let (k, l) = (comp[i], comp[m + j]);
        if k == l {
            if slack < -eq_tol {
                return Err(Error::NotCertifiable(format!(
                    "cell ({i},{j}) violates feasibility within its own support component"
                )));
            }
        } else {
            // shifting component k by t_k changes the sum by t_k − t_l
            slack_edges.push((l, k, slack));
        }
    }
    let shifts =
        solve_difference_constraints(comp_count, &slack_edges, eq_tol).ok_or_else(|| {
            Error::NotCertifiable("negative cycle in the cross-component slack graph".into())
        })?;
    for i in 0..m {
        if touched[i] {
            phi[i] += shifts[comp[i]];
        }
    }
    for j in 0..n {
        if touched[m + j] {
            psi[j] -= shifts[comp[m + j]];
        }
    }

    // complete untouched columns from touched rows, then untouched rows,
    // then the deferred columns; all-infinite lines fall back to 0
    let mut psi_defined: Vec<bool> = (0..n).map(|j| touched[m + j]).collect();
    for j in 0..n {
        if psi_defined[j] {
            continue;
        }
        let best = (0..m)
            .filter(|&i| touched[i] && c.is_finite_at(i, j))
            .map(|i| c.at(i, j).value() - phi[i])
            .fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            psi[j] = best;
            psi_defined[j] = true;
        }
    }
    for i in 0..m {
        if touched[i] {
            continue;
        }
        let best = (0..n)
            .filter(|&j| psi_defined[j] && c.is_finite_at(i, j))
            .map(|j| c.at(i, j).value() - psi[j])
            .fold(f64::INFINITY, f64::min);
        phi[i] = if best.is_finite() { best } else { 0.0 };
    }
    for j in 0..n {
        if psi_defined[j] {
            continue;
        }
        let best = (0..m)
            .filter(|&i| c.is_finite_at(i, j))
            .map(|i| c.at(i, j).value() - phi[i])
            .fold(f64::INFINITY, f64::min);
        psi[j] = if best.is_finite() { best } else { 0.0 };
    }

    // the construction guarantees these; keep the contrapositive honest
    // (2× margin: the slack-graph distances are exact only when no cycle
    // falls inside the detection band)
    for (i, j) in c.finite_cells() {
        if phi[i] + psi[j] > c.at(i, j).value() + 2.0 * eq_tol {
            return Err(Error::NotCertifiable(format!(
                "completed potentials violate feasibility at ({i},{j})"
            )));
        }
    }
    for &(i, j) in &support {
        if (phi[i] + psi[j] - c.at(i, j).value()).abs() > 2.0 * eq_tol {
            return Err(Error::NotCertifiable(format!(
                "completed potentials lose tightness at ({i},{j})"
            )));
        }
    }
    PotentialPair::new(phi.into(), psi.into())
}

/// Strengthens potentials to `−c ≤ φ⊕ψ ≤ c` everywhere (the bound is vacuous
/// where `c = ∞`) with equality on the plan's support.
///
/// Requires the cost normalized so its minimum finite entry is at least 1.
/// A seed that already satisfies every constraint is returned unchanged;
/// otherwise the linear feasibility system is solved from scratch. An
/// unsolvable system proves the plan is not optimal.
pub fn strengthen_potentials(
    plan: &TransportPlan,
    c: &CostMatrix,
    seed: &PotentialPair,
) -> Result<PotentialPair> {
    let (m, n) = (plan.rows(), plan.cols());
    if c.rows() != m || c.cols() != n || seed.phi().len() != m || seed.psi().len() != n {
        return Err(Error::DimensionMismatch(
            "plan, cost and seed shapes differ".into(),
        ));
    }
    match c.min_finite() {
        Some(min) if min >= 1.0 - 1e-12 => {}
        Some(min) => {
            return Err(Error::InvalidValue(format!(
                "cost must be normalized to min finite entry >= 1, got {min}"
            )))
        }
        None => return Err(Error::EmptyFiniteSupport),
    }
    let support = plan.support(DEFAULT_SUPPORT_THRESHOLD);
    for &(i, j) in &support {
        if !c.is_finite_at(i, j) {
            return Err(Error::InfiniteSupportCost(i, j));
        }
    }
    let scale = 1.0 + c.max_finite().unwrap_or(0.0).abs();
    let tol = 1e-9 * scale;

    if satisfies_strengthened(c, &support, seed, tol) {
        return Ok(seed.clone());
    }

    // difference constraints over x = (φ_0..φ_{m-1}, η_0..η_{n-1}), η = −ψ
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for (i, j) in c.finite_cells() {
        let w = c.at(i, j).value();
        edges.push((m + j, i, w)); // φ_i − η_j ≤ c_ij
        edges.push((i, m + j, w)); // η_j − φ_i ≤ c_ij
    }
    for &(i, j) in &support {
        edges.push((i, m + j, -c.at(i, j).value())); // η_j − φ_i ≤ −c_ij
    }
    let dist = solve_difference_constraints(m + n, &edges, tol).ok_or_else(|| {
        Error::PlanNotOptimal("the strengthened potential system is infeasible".into())
    })?;
    let phi: Vec<f64> = dist[..m].to_vec();
    let psi: Vec<f64> = dist[m..].iter().map(|d| -d).collect();
    let out = PotentialPair::new(phi.into(), psi.into())?;
    if !satisfies_strengthened(c, &support, &out, tol) {
        return Err(Error::Numerical(
            "strengthened solution failed its own check".into(),
        ));
    }
    Ok(out)
}

fn satisfies_strengthened(
    c: &CostMatrix,
    support: &[(usize, usize)],
    p: &PotentialPair,
    tol: f64,
) -> bool {
    for (i, j) in c.finite_cells() {
        if p.sum_at(i, j).abs() > c.at(i, j).value() + tol {
            return false;
        }
    }
    support
        .iter()
        .all(|&(i, j)| (p.sum_at(i, j) - c.at(i, j).value()).abs() <= tol)
}

/// Bellman–Ford on difference constraints `x_v ≤ x_u + w` (one edge `(u, v,
/// w)` per constraint), started from zero everywhere, which is equivalent to
/// a virtual source connected to every node.
///
/// Returns a feasible assignment, or `None` when the detection pass still
/// relaxes by more than `margin` (a genuinely negative cycle).
pub(crate) fn solve_difference_constraints(
    nodes: usize,
    edges: &[(usize, usize, f64)],
    margin: f64,
) -> Option<Vec<f64>> {
    let mut dist = vec![0.0f64; nodes];
    for _ in 0..nodes.saturating_sub(1) {
        let mut changed = false;
        for &(u, v, w) in edges {
            let cand = dist[u] + w;
            if cand < dist[v] {
                dist[v] = cand;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for &(u, v, w) in edges {
        if dist[u] + w < dist[v] - margin {
            return None;
        }
    }
    Some(dist)
}
