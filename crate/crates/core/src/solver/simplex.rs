//! Network simplex for uncapacitated min-cost flow on an arc list.
//!
//! The caller supplies an initial basic feasible solution: a set of arcs
//! whose undirected skeleton is a forest, carrying all of the nonzero flow.
//! Each forest component is attached to a virtual root through a zero-cost
//! artificial arc that never carries flow and is never priced, so no Big-M
//! constants enter the float arithmetic.
//!
//! Pivot selection is Bland's rule on the fixed arc order (lowest-index arc
//! with negative reduced cost enters, lowest-index blocking arc leaves),
//! which makes every run deterministic.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct EngineArc {
    pub from: usize,
    pub to: usize,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct EngineRun {
    /// Flow per real arc, in the caller's arc order.
    pub flow: Vec<f64>,
    /// Node potentials; reduced cost of arc `(u, v)` is `c + π[u] − π[v]`.
    pub potential: Vec<f64>,
    pub iterations: usize,
    pub objective: f64,
    /// False when the pivot budget ran out before optimality.
    pub optimal: bool,
}

pub(crate) struct NetworkSimplex {
    nodes: usize,
    arcs: Vec<EngineArc>,
}

impl NetworkSimplex {
    pub fn new(nodes: usize, arcs: Vec<EngineArc>) -> Self {
        NetworkSimplex { nodes, arcs }
    }

    pub fn solve(
        &self,
        initial_basis: &[(usize, f64)],
        pivot_tol: f64,
        max_iterations: usize,
    ) -> Result<EngineRun> {
        let real = self.arcs.len();
        let root = self.nodes;

        let mut from: Vec<usize> = self.arcs.iter().map(|a| a.from).collect();
        let mut to: Vec<usize> = self.arcs.iter().map(|a| a.to).collect();
        let mut cost: Vec<f64> = self.arcs.iter().map(|a| a.cost).collect();
        let mut in_basis = vec![false; real];
        let mut flow = vec![0.0; real];

        let mut uf = UnionFind::new(self.nodes);
        for &(a, f) in initial_basis {
            if a >= real {
                return Err(Error::Numerical(format!("basis arc {a} out of range")));
            }
            if f < 0.0 {
                return Err(Error::Numerical(format!(
                    "negative initial flow on arc {a}"
                )));
            }
            if !uf.union(from[a], to[a]) {
                return Err(Error::Numerical("initial basis contains a cycle".into()));
            }
            in_basis[a] = true;
            flow[a] = f;
        }

        // one zero-cost artificial arc per forest component, lowest node first
        for u in 0..self.nodes {
            if uf.find(u) == u {
                from.push(u);
                to.push(root);
                cost.push(0.0);
                in_basis.push(true);
                flow.push(0.0);
            }
        }

        let total_arcs = from.len();
        let total_nodes = self.nodes + 1;
        let mut parent_node = vec![usize::MAX; total_nodes];
        let mut parent_arc = vec![usize::MAX; total_nodes];
        let mut depth = vec![0usize; total_nodes];
        let mut pi = vec![0.0; total_nodes];

        let mut iterations = 0usize;
        let mut optimal = false;

        loop {
            // rebuild tree structure and potentials from the basis
            let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); total_nodes];
            for a in 0..total_arcs {
                if in_basis[a] {
                    adj[from[a]].push((to[a], a));
                    adj[to[a]].push((from[a], a));
                }
            }
            let mut seen = vec![false; total_nodes];
            seen[root] = true;
            parent_node[root] = usize::MAX;
            parent_arc[root] = usize::MAX;
            depth[root] = 0;
            pi[root] = 0.0;
            let mut stack = vec![root];
            let mut reached = 1usize;
            while let Some(x) = stack.pop() {
                for &(y, a) in &adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        parent_node[y] = x;
                        parent_arc[y] = a;
                        depth[y] = depth[x] + 1;
                        pi[y] = if from[a] == x {
                            pi[x] + cost[a]
                        } else {
                            pi[x] - cost[a]
                        };
                        stack.push(y);
                        reached += 1;
                    }
                }
            }
            if reached != total_nodes {
                return Err(Error::Numerical("basis does not span the node set".into()));
            }

            // Bland: lowest-index real arc pricing below -pivot_tol enters
            let entering =
                (0..real).find(|&a| !in_basis[a] && cost[a] + pi[from[a]] - pi[to[a]] < -pivot_tol);
            let Some(entering) = entering else {
                optimal = true;
                break;
            };

            if iterations >= max_iterations {
                break;
            }
            iterations += 1;

            // the unique cycle closed by the entering arc, oriented along it
            let (u, v) = (from[entering], to[entering]);
            let mut forward: Vec<usize> = Vec::new();
            let mut backward: Vec<usize> = Vec::new();
            let (mut x, mut y) = (u, v);
            while depth[x] > depth[y] {
                // segment root..u is travelled parent -> child in the cycle
                let a = parent_arc[x];
                if from[a] == parent_node[x] {
                    forward.push(a)
                } else {
                    backward.push(a)
                }
                x = parent_node[x];
            }
            while depth[y] > depth[x] {
                // segment v..root is travelled child -> parent
                let a = parent_arc[y];
                if from[a] == y {
                    forward.push(a)
                } else {
                    backward.push(a)
                }
                y = parent_node[y];
            }
            while x != y {
                let a = parent_arc[x];
                if from[a] == parent_node[x] {
                    forward.push(a)
                } else {
                    backward.push(a)
                }
                x = parent_node[x];
                let b = parent_arc[y];
                if from[b] == y {
                    forward.push(b)
                } else {
                    backward.push(b)
                }
                y = parent_node[y];
            }

            let mut theta = f64::INFINITY;
            for &a in &backward {
                theta = theta.min(flow[a]);
            }
            if theta == f64::INFINITY {
                return Err(Error::Numerical(
                    "pivot cycle has no blocking arc (unbounded direction)".into(),
                ));
            }
            let leaving = backward
                .iter()
                .copied()
                .filter(|&a| flow[a] <= theta)
                .min()
                .expect("blocking arc exists");

            flow[entering] += theta;
            for &a in &forward {
                flow[a] += theta;
            }
            for &a in &backward {
                flow[a] -= theta;
            }
            flow[leaving] = 0.0;
            in_basis[entering] = true;
            in_basis[leaving] = false;
        }

        let objective = (0..real).map(|a| flow[a] * cost[a]).sum();
        Ok(EngineRun {
            flow: flow[..real].to_vec(),
            potential: pi[..self.nodes].to_vec(),
            iterations,
            objective,
            optimal,
        })
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }

    /// Returns false when `x` and `y` were already connected.
    pub fn union(&mut self, x: usize, y: usize) -> bool {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        // keep the smaller index as representative for determinism
        let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
        self.parent[hi] = lo;
        true
    }
}
