use ndarray::Array2;

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::marginal::Marginal;

/// Outcome of the finite-cost feasibility test.
#[derive(Debug, Clone)]
pub enum Feasibility {
    Feasible,
    Infeasible(FeasibilityCut),
}

/// A violating cut: a row subset whose mass exceeds what its finite-cost
/// neighbors can absorb, certifying that no coupling lives on `{c < ∞}`.
#[derive(Debug, Clone)]
pub struct FeasibilityCut {
    /// Rows `X ⊆ A` (indices).
    pub a_subset: Vec<usize>,
    /// Columns reachable from `X` through finite-cost cells.
    pub b_neighbors: Vec<usize>,
    /// `μ(X)`.
    pub mu_mass: f64,
    /// `ν(N(X))`; the cut certifies `mu_mass > nu_mass`.
    pub nu_mass: f64,
}

pub(crate) enum Routing {
    Feasible(Array2<f64>),
    Infeasible(FeasibilityCut),
}

/// Decides whether some coupling of `(μ, ν)` is concentrated on the
/// finite-cost mask, by bipartite max-flow with capacities `μ` on sources,
/// `ν` on sinks and `∞` on mask cells.
///
/// Uses the default tolerance `1e-9` on the flow deficit.
pub fn finite_cost_feasible(mu: &Marginal, nu: &Marginal, c: &CostMatrix) -> Result<Feasibility> {
    finite_cost_feasible_with_tol(mu, nu, c, 1e-9)
}

pub fn finite_cost_feasible_with_tol(
    mu: &Marginal,
    nu: &Marginal,
    c: &CostMatrix,
    tol: f64,
) -> Result<Feasibility> {
    match route_feasible_mass(mu, nu, c, tol)? {
        Routing::Feasible(_) => Ok(Feasibility::Feasible),
        Routing::Infeasible(cut) => Ok(Feasibility::Infeasible(cut)),
    }
}

/// Max-flow core: returns a feasible mass routing on the mask (deficit within
/// `tol`), or the violating cut. The routing seeds the simplex solver.
pub(crate) fn route_feasible_mass(
    mu: &Marginal,
    nu: &Marginal,
    c: &CostMatrix,
    tol: f64,
) -> Result<Routing> {
    let (m, n) = (mu.len(), nu.len());
    if c.rows() != m || c.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "cost is {}x{}, marginals are {m}x{n}",
            c.rows(),
            c.cols()
        )));
    }

    // node layout: 0 = source, 1..=m rows, m+1..=m+n columns, m+n+1 = sink
    let nodes = m + n + 2;
    let source = 0;
    let sink = m + n + 1;
    let mut graph = FlowGraph::new(nodes);
    for i in 0..m {
        graph.add_edge(source, 1 + i, mu.weight(i));
    }
    for j in 0..n {
        graph.add_edge(1 + m + j, sink, nu.weight(j));
    }
    for (i, j) in c.finite_cells() {
        graph.add_edge(1 + i, 1 + m + j, f64::INFINITY);
    }

    let total: f64 = mu.weights().sum();
    let flow = graph.max_flow(source, sink);
    if total - flow <= tol {
        let mut mass = Array2::zeros((m, n));
        for (i, j) in c.finite_cells() {
            mass[[i, j]] = graph.flow_on(1 + i, 1 + m + j);
        }
        return Ok(Routing::Feasible(mass));
    }

    let reachable = graph.residual_reachable(source);
    let a_subset: Vec<usize> = (0..m).filter(|&i| reachable[1 + i]).collect();
    let mut b_mask = vec![false; n];
    for &i in &a_subset {
        for (j, hit) in b_mask.iter_mut().enumerate() {
            if c.is_finite_at(i, j) {
                *hit = true;
            }
        }
    }
    let b_neighbors: Vec<usize> = (0..n).filter(|&j| b_mask[j]).collect();
    // `+ 0.0` normalizes the -0.0 an empty sum would produce
    let mu_mass = a_subset.iter().map(|&i| mu.weight(i)).sum::<f64>() + 0.0;
    let nu_mass = b_neighbors.iter().map(|&j| nu.weight(j)).sum::<f64>() + 0.0;
    Ok(Routing::Infeasible(FeasibilityCut {
        a_subset,
        b_neighbors,
        mu_mass,
        nu_mass,
    }))
}

/// Adjacency-list residual graph with paired forward/backward edges.
struct FlowGraph {
    to: Vec<usize>,
    cap: Vec<f64>,
    adj: Vec<Vec<usize>>,
    // forward edge index by (from, to) for flow lookup
    fwd: std::collections::HashMap<(usize, usize), usize>,
}

impl FlowGraph {
    fn new(nodes: usize) -> Self {
        FlowGraph {
            to: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); nodes],
            fwd: std::collections::HashMap::new(),
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, capacity: f64) {
        let e = self.to.len();
        self.to.push(v);
        self.cap.push(capacity);
        self.adj[u].push(e);
        self.to.push(u);
        self.cap.push(0.0);
        self.adj[v].push(e + 1);
        self.fwd.insert((u, v), e);
    }

    /// Flow carried by the forward edge `(u, v)` (its paired reverse capacity).
    fn flow_on(&self, u: usize, v: usize) -> f64 {
        match self.fwd.get(&(u, v)) {
            Some(&e) => self.cap[e ^ 1],
            None => 0.0,
        }
    }

    /// Edmonds–Karp. Each augmentation zeroes at least one residual exactly,
    /// so termination does not depend on the float capacities.
    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        loop {
            let prev = self.bfs_path(s, t);
            let Some(prev) = prev else { break };
            let mut bottleneck = f64::INFINITY;
            let mut v = t;
            while v != s {
                let e = prev[v];
                bottleneck = bottleneck.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = prev[v];
                if self.cap[e] == bottleneck {
                    self.cap[e] = 0.0;
                } else {
                    self.cap[e] -= bottleneck;
                }
                self.cap[e ^ 1] += bottleneck;
                v = self.to[e ^ 1];
            }
            total += bottleneck;
        }
        total
    }

    fn bfs_path(&self, s: usize, t: usize) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if !seen[v] && self.cap[e] > 0.0 {
                    seen[v] = true;
                    prev[v] = e;
                    if v == t {
                        return Some(prev);
                    }
                    queue.push_back(v);
                }
            }
        }
        None
    }

    fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if !seen[v] && self.cap[e] > 0.0 {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}
