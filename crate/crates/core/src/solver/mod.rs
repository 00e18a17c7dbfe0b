//! Exact solution of the discrete transport problem on the finite-cost mask.
//!
//! Feasibility is decided first by bipartite max-flow (with a violating-cut
//! witness on failure); the max-flow routing is then pared down to a
//! spanning-forest basis and handed to the network simplex. Infinite-cost
//! cells never enter the arc list, so the returned plan is exactly zero on
//! them.

mod brute_force;
mod max_flow;
pub(crate) mod simplex;

pub use brute_force::{brute_force_solve, BruteForceResult, BRUTE_FORCE_CELL_LIMIT};
pub use max_flow::{
    finite_cost_feasible, finite_cost_feasible_with_tol, Feasibility, FeasibilityCut,
};

use ndarray::Array2;

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::marginal::Marginal;
use crate::plan::{plan_cost, TransportPlan, DEFAULT_SUPPORT_THRESHOLD};
use crate::potential::PotentialPair;
use max_flow::Routing;
use simplex::{EngineArc, NetworkSimplex};

/// Solver knobs. `max_iterations = None` resolves to `10·(m+n)²`.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub tolerance: f64,
    pub max_iterations: Option<usize>,
    pub support_threshold: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tolerance: 1e-9,
            max_iterations: None,
            support_threshold: DEFAULT_SUPPORT_THRESHOLD,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidValue(format!(
                "tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        if let Some(0) = self.max_iterations {
            return Err(Error::InvalidValue("max_iterations must be >= 1".into()));
        }
        Ok(())
    }

    pub fn resolved_max_iterations(&self, m: usize, n: usize) -> usize {
        self.max_iterations.unwrap_or(10 * (m + n) * (m + n))
    }
}

/// An optimal solve: the plan, its cost against the original matrix, the
/// complementary-slackness potentials, and the pivot count.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub plan: TransportPlan,
    pub value: ExtReal,
    pub potentials: PotentialPair,
    pub iterations: usize,
}

/// Either an optimal plan or a certified infeasibility.
#[derive(Debug, Clone)]
pub enum MkSolution {
    Optimal(Box<SolveResult>),
    Infeasible(FeasibilityCut),
}

/// Solves the transport problem exactly (to tolerance).
///
/// The cost is normalized internally so its minimum finite entry is 1; the
/// reported value is computed against the original matrix, so no un-shifting
/// error is introduced. Returns `Infeasible` exactly when
/// [`finite_cost_feasible`] does.
pub fn solve_mk(
    mu: &Marginal,
    nu: &Marginal,
    c: &CostMatrix,
    cfg: &SolveConfig,
) -> Result<MkSolution> {
    cfg.validate()?;
    let (m, n) = (mu.len(), nu.len());
    if c.rows() != m || c.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "cost is {}x{}, marginals are {m}x{n}",
            c.rows(),
            c.cols()
        )));
    }

    let routing = max_flow::route_feasible_mass(mu, nu, c, cfg.tolerance)?;
    let initial_mass = match routing {
        Routing::Infeasible(cut) => return Ok(MkSolution::Infeasible(cut)),
        Routing::Feasible(mass) => mass,
    };

    let (c_norm, shift) = c.normalize()?;

    // active points only; zero-mass rows and columns are completed afterwards
    let a_active: Vec<usize> = (0..m).filter(|&i| mu.weight(i) > 0.0).collect();
    let b_active: Vec<usize> = (0..n).filter(|&j| nu.weight(j) > 0.0).collect();
    let mut a_node = vec![usize::MAX; m];
    let mut b_node = vec![usize::MAX; n];
    for (k, &i) in a_active.iter().enumerate() {
        a_node[i] = k;
    }
    for (k, &j) in b_active.iter().enumerate() {
        b_node[j] = a_active.len() + k;
    }
    let node_count = a_active.len() + b_active.len();

    // arcs in row-major cell order so Bland's rule is reproducible
    let mut arcs = Vec::new();
    let mut arc_cells: Vec<(usize, usize)> = Vec::new();
    for (i, j) in c_norm.finite_cells() {
        if a_node[i] == usize::MAX || b_node[j] == usize::MAX {
            continue;
        }
        arc_cells.push((i, j));
        arcs.push(EngineArc {
            from: a_node[i],
            to: b_node[j],
            cost: c_norm.at(i, j).value(),
        });
    }

    // pare the max-flow routing down to a forest
    let mut flows: Vec<f64> = arc_cells
        .iter()
        .map(|&(i, j)| initial_mass[[i, j]])
        .collect();
    cancel_cycles(&arcs, &mut flows, node_count);
    let initial_basis: Vec<(usize, f64)> = (0..arcs.len())
        .filter(|&a| flows[a] > 0.0)
        .map(|a| (a, flows[a]))
        .collect();

    let max_fin = c_norm.max_finite().unwrap_or(0.0);
    let pivot_tol = cfg.tolerance * (1.0 + max_fin);
    let max_iters = cfg.resolved_max_iterations(m, n);

    let engine = NetworkSimplex::new(node_count, arcs);
    let run = engine.solve(&initial_basis, pivot_tol, max_iters)?;

    let mut mass = Array2::zeros((m, n));
    for (a, &(i, j)) in arc_cells.iter().enumerate() {
        mass[[i, j]] = run.flow[a];
    }
    let plan = TransportPlan::new(mass, mu, nu, cfg.tolerance)?;

    if !run.optimal {
        return Err(Error::IterationLimit {
            limit: max_iters,
            best: Box::new(plan),
        });
    }

    // potentials: φ = −π on rows, ψ = π − shift on columns, then complete
    // the zero-mass points by c-transform so every entry is finite
    let mut phi = vec![0.0; m];
    let mut psi = vec![0.0; n];
    let mut phi_set = vec![false; m];
    let mut psi_set = vec![false; n];
    for &i in &a_active {
        phi[i] = -run.potential[a_node[i]];
        phi_set[i] = true;
    }
    for &j in &b_active {
        psi[j] = run.potential[b_node[j]] - shift;
        psi_set[j] = true;
    }
    for i in 0..m {
        if !phi_set[i] {
            let best = (0..n)
                .filter(|&j| psi_set[j] && c.is_finite_at(i, j))
                .map(|j| c.at(i, j).value() - psi[j])
                .fold(f64::INFINITY, f64::min);
            phi[i] = if best.is_finite() { best } else { 0.0 };
            phi_set[i] = true;
        }
    }
    for j in 0..n {
        if !psi_set[j] {
            let best = (0..m)
                .filter(|&i| c.is_finite_at(i, j))
                .map(|i| c.at(i, j).value() - phi[i])
                .fold(f64::INFINITY, f64::min);
            psi[j] = if best.is_finite() { best } else { 0.0 };
        }
    }
    let potentials = PotentialPair::new(phi.into(), psi.into())?;

    let value = plan_cost(&plan, c)?;
    Ok(MkSolution::Optimal(Box::new(SolveResult {
        plan,
        value,
        potentials,
        iterations: run.iterations,
    })))
}

/// Cancels cycles in the support of a feasible routing until the positive
/// arcs form a forest, pushing each cycle in its cost-nonincreasing
/// direction. Marginals are preserved exactly.
fn cancel_cycles(arcs: &[EngineArc], flows: &mut [f64], node_count: usize) {
    while let Some(cycle) = find_support_cycle(arcs, flows, node_count) {
        // sign +1: push along the arc direction; -1: against it
        let delta: f64 = cycle.iter().map(|&(a, s)| s as f64 * arcs[a].cost).sum();
        let dir: f64 = if delta <= 0.0 { 1.0 } else { -1.0 };
        let mut theta = f64::INFINITY;
        for &(a, s) in &cycle {
            if dir * (s as f64) < 0.0 {
                theta = theta.min(flows[a]);
            }
        }
        // a cycle alternates orientation in a bipartite graph, so both
        // directions contain a decreasing arc
        for &(a, s) in &cycle {
            if dir * (s as f64) < 0.0 {
                if flows[a] <= theta {
                    flows[a] = 0.0;
                } else {
                    flows[a] -= theta;
                }
            } else {
                flows[a] += theta;
            }
        }
    }
}

/// One undirected cycle among arcs with positive flow, as (arc, ±1) pairs
/// giving each arc's orientation along the traversal.
fn find_support_cycle(
    arcs: &[EngineArc],
    flows: &[f64],
    node_count: usize,
) -> Option<Vec<(usize, i8)>> {
    let mut adj: Vec<Vec<(usize, usize, i8)>> = vec![Vec::new(); node_count];
    for (a, arc) in arcs.iter().enumerate() {
        if flows[a] > 0.0 {
            adj[arc.from].push((arc.to, a, 1));
            adj[arc.to].push((arc.from, a, -1));
        }
    }
    let mut state = vec![0u8; node_count]; // 0 unseen, 1 on stack, 2 done
    let mut parent_edge: Vec<Option<(usize, usize, i8)>> = vec![None; node_count];
    for start in 0..node_count {
        if state[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, usize::MAX)];
        state[start] = 1;
        while let Some(&(x, via)) = stack.last() {
            let mut advanced = false;
            for &(y, a, s) in &adj[x] {
                if a == via {
                    continue;
                }
                match state[y] {
                    0 => {
                        state[y] = 1;
                        parent_edge[y] = Some((x, a, s));
                        stack.push((y, a));
                        advanced = true;
                        break;
                    }
                    1 => {
                        // back edge x→y plus the tree path y⇝x closes the
                        // cycle; parent edges keep their stored (parent →
                        // child) orientation, which is the traversal
                        // direction on the way back down from y to x
                        let mut cycle = vec![(a, s)];
                        let mut cur = x;
                        while cur != y {
                            let (p, pa, ps) = parent_edge[cur].expect("on-stack node has parent");
                            cycle.push((pa, ps));
                            cur = p;
                        }
                        return Some(cycle);
                    }
                    _ => {}
                }
            }
            if !advanced {
                state[x] = 2;
                stack.pop();
            }
        }
    }
    None
}
