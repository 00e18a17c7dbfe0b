//! Verification predicates for optimality certificates: the tight/feasible
//! potential check, its strengthened two-sided variant, cyclical
//! monotonicity of supports, strong monotonicity of plans, and the classic
//! constraint-qualification diagnostics that this toolkit does not need but
//! reports for comparison.
//!
//! A note on scale: on finite index sets, cyclical monotonicity of a
//! finite-cost plan's support is a *complete* optimality test even when the
//! cost takes infinite values. If a cheaper coupling existed, the
//! difference of the two plans would decompose into finitely many
//! alternating cycles, one of which strictly lowers cost — and that cycle
//! is a cyclic reassignment of support pairs through finite-cost cells,
//! contradicting monotonicity. The general theory on infinite spaces admits
//! cyclically monotone plans that are not optimal (the decomposition
//! argument breaks down when infinitely many cycles are needed), so that
//! separation has no finite witness and is deliberately out of scope here.

use crate::certificate::{Certificate, Verdicts};
use crate::cost::CostMatrix;
use crate::duality::{duality_gap, extract_potentials};
use crate::error::{Error, Result};
use crate::marginal::Marginal;
use crate::plan::TransportPlan;
use crate::potential::PotentialPair;
use crate::solver::SolveConfig;

/// The index pairs a plan is concentrated on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    pairs: Vec<(usize, usize)>,
}

impl SupportSet {
    /// Pairs must be distinct and inside the `rows × cols` box.
    pub fn new(pairs: Vec<(usize, usize)>, rows: usize, cols: usize) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(i, j) in &pairs {
            if i >= rows || j >= cols {
                return Err(Error::InvalidValue(format!(
                    "support pair ({i},{j}) outside {rows}x{cols}"
                )));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidValue(format!(
                    "duplicate support pair ({i},{j})"
                )));
            }
        }
        Ok(SupportSet { pairs })
    }

    /// Cells of `plan` with mass above `threshold`.
    pub fn from_plan(plan: &TransportPlan, threshold: f64) -> Self {
        SupportSet {
            pairs: plan.support(threshold),
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Which clause of a certificate check broke.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateClause {
    /// `φ ⊕ ψ ≤ c` (or `|φ ⊕ ψ| ≤ c` for the strengthened form) failed.
    Feasibility,
    /// Equality on a support cell failed.
    Tightness,
}

/// Pass, or the first violating cell together with the broken clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateCheck {
    Pass,
    Fail {
        cell: (usize, usize),
        clause: CertificateClause,
    },
}

impl CertificateCheck {
    pub fn passed(&self) -> bool {
        matches!(self, CertificateCheck::Pass)
    }
}

/// Checks `φ_i + ψ_j ≤ c_ij + tol` on every cell (vacuous where `c = ∞`) and
/// `|φ_i + ψ_j − c_ij| ≤ tol` on every cell with mass above
/// `support_threshold`. Cells are scanned row-major; the first violation is
/// the witness.
pub fn verify_certificate(
    plan: &TransportPlan,
    c: &CostMatrix,
    p: &PotentialPair,
    tol: f64,
    support_threshold: f64,
) -> Result<CertificateCheck> {
    check_shapes(plan, c, p)?;
    for i in 0..c.rows() {
        for j in 0..c.cols() {
            if c.is_finite_at(i, j) && p.sum_at(i, j) > c.at(i, j).value() + tol {
                return Ok(CertificateCheck::Fail {
                    cell: (i, j),
                    clause: CertificateClause::Feasibility,
                });
            }
        }
    }
    for (i, j) in plan.support(support_threshold) {
        let violates = match c.is_finite_at(i, j) {
            true => (p.sum_at(i, j) - c.at(i, j).value()).abs() > tol,
            false => true, // mass sits outside {c < ∞}: equality cannot hold
        };
        if violates {
            return Ok(CertificateCheck::Fail {
                cell: (i, j),
                clause: CertificateClause::Tightness,
            });
        }
    }
    Ok(CertificateCheck::Pass)
}

/// Strengthened form: `|φ_i + ψ_j| ≤ c_ij + tol` everywhere and equality on
/// support ∩ {c < ∞}. Expects a cost normalized to min finite entry ≥ 1.
pub fn verify_strengthened_certificate(
    plan: &TransportPlan,
    c_normalized: &CostMatrix,
    p: &PotentialPair,
    tol: f64,
    support_threshold: f64,
) -> Result<CertificateCheck> {
    check_shapes(plan, c_normalized, p)?;
    for i in 0..c_normalized.rows() {
        for j in 0..c_normalized.cols() {
            if c_normalized.is_finite_at(i, j)
                && p.sum_at(i, j).abs() > c_normalized.at(i, j).value() + tol
            {
                return Ok(CertificateCheck::Fail {
                    cell: (i, j),
                    clause: CertificateClause::Feasibility,
                });
            }
        }
    }
    for (i, j) in plan.support(support_threshold) {
        if !c_normalized.is_finite_at(i, j) {
            continue; // outside {c < ∞}: the equality clause does not apply
        }
        if (p.sum_at(i, j) - c_normalized.at(i, j).value()).abs() > tol {
            return Ok(CertificateCheck::Fail {
                cell: (i, j),
                clause: CertificateClause::Tightness,
            });
        }
    }
    Ok(CertificateCheck::Pass)
}

fn check_shapes(plan: &TransportPlan, c: &CostMatrix, p: &PotentialPair) -> Result<()> {
    if plan.rows() != c.rows()
        || plan.cols() != c.cols()
        || p.phi().len() != c.rows()
        || p.psi().len() != c.cols()
    {
        return Err(Error::DimensionMismatch(
            "plan, cost and potentials must share dimensions".into(),
        ));
    }
    Ok(())
}

/// Outcome of the cyclical monotonicity check.
#[derive(Debug, Clone, PartialEq)]
pub enum Monotonicity {
    Monotone,
    /// A family of support pairs whose cyclic reassignment strictly lowers
    /// total cost: `Σ c(a_i, b_i) > Σ c(a_i, b_{i+1})`.
    Violating(Vec<(usize, usize)>),
}

/// Decides cyclical monotonicity of a support set.
///
/// Builds the exchange graph on support pairs (edge `u → v` weighs
/// `c(a_u, b_v) − c(a_u, b_u)`, omitted when `c(a_u, b_v) = ∞`) and searches
/// for a negative cycle. Detection runs Karp's minimum-mean-cycle recurrence
/// with per-level predecessors: same-row support pairs create zero-weight
/// exchange cycles, and a flat predecessor array can go stale on those,
/// which would hide genuine violations. A cycle only counts as violating
/// when its weight clears `−tol · len · (1 + max |c| on the cycle)`.
/// Quadratic in the support size.
pub fn cyclical_monotonicity_check(
    support: &SupportSet,
    c: &CostMatrix,
    tol: f64,
) -> Result<Monotonicity> {
    let pairs = support.pairs();
    for &(i, j) in pairs {
        if i >= c.rows() || j >= c.cols() {
            return Err(Error::InvalidValue(format!(
                "support pair ({i},{j}) out of bounds"
            )));
        }
        if !c.is_finite_at(i, j) {
            return Err(Error::InfiniteSupportCost(i, j));
        }
    }
    let k = pairs.len();
    if k <= 1 {
        return Ok(Monotonicity::Monotone);
    }

    // incoming-edge lists: in_edges[v] = (u, weight of u -> v)
    let mut in_edges: Vec<Vec<(usize, f64)>> = vec![Vec::new(); k];
    for (u, &(au, bu)) in pairs.iter().enumerate() {
        for (v, &(_, bv)) in pairs.iter().enumerate() {
            if u == v || !c.is_finite_at(au, bv) {
                continue;
            }
            in_edges[v].push((u, c.at(au, bv).value() - c.at(au, bu).value()));
        }
    }

    // d[t][v] = cheapest walk of exactly t edges ending at v (source free)
    let mut d = vec![vec![f64::INFINITY; k]; k + 1];
    let mut pred = vec![vec![usize::MAX; k]; k + 1];
    d[0].fill(0.0);
    for t in 1..=k {
        for v in 0..k {
            for &(u, w) in &in_edges[v] {
                if d[t - 1][u].is_finite() && d[t - 1][u] + w < d[t][v] {
                    d[t][v] = d[t - 1][u] + w;
                    pred[t][v] = u;
                }
            }
        }
    }

    // Karp: the minimum cycle mean is min_v max_t (d[k][v] − d[t][v])/(k − t)
    let max_c = pairs
        .iter()
        .map(|&(i, j)| c.at(i, j).value())
        .fold(0.0f64, f64::max);
    let detect_margin = tol * (1.0 + max_c);
    let mut best: Option<(f64, usize)> = None;
    for (v, &full) in d[k].iter().enumerate() {
        if !full.is_finite() {
            continue;
        }
        let mut worst = f64::NEG_INFINITY;
        for (t, level) in d.iter().enumerate().take(k) {
            if level[v].is_finite() {
                worst = worst.max((full - level[v]) / (k - t) as f64);
            }
        }
        if worst.is_finite() && best.is_none_or(|(mean, _)| worst < mean) {
            best = Some((worst, v));
        }
    }
    let Some((min_mean, v_star)) = best else {
        return Ok(Monotonicity::Monotone);
    };
    if min_mean >= -detect_margin {
        return Ok(Monotonicity::Monotone);
    }

    // walk the per-level predecessors of the optimal k-edge walk; any node
    // repetition delimits a cycle, and every cycle on this walk attains the
    // minimum mean, so it is genuinely negative
    let mut walk = vec![usize::MAX; k + 1];
    walk[k] = v_star;
    for t in (0..k).rev() {
        walk[t] = pred[t + 1][walk[t + 1]];
    }
    let mut seen_at = vec![usize::MAX; k];
    let mut cycle_nodes: Vec<usize> = Vec::new();
    'outer: for (t, &node) in walk.iter().enumerate() {
        if seen_at[node] != usize::MAX {
            cycle_nodes = walk[seen_at[node]..t].to_vec();
            break 'outer;
        }
        seen_at[node] = t;
    }
    if cycle_nodes.is_empty() {
        return Err(Error::Numerical(
            "mean-cycle walk contains no repetition".into(),
        ));
    }

    // acceptance rule on the actual witness family
    let len = cycle_nodes.len();
    let mut assigned = 0.0;
    let mut swapped = 0.0;
    let mut max_on_cycle = 0.0f64;
    for t in 0..len {
        let (ai, bi) = pairs[cycle_nodes[t]];
        let (_, bnext) = pairs[cycle_nodes[(t + 1) % len]];
        assigned += c.at(ai, bi).value();
        swapped += c.at(ai, bnext).value();
        max_on_cycle = max_on_cycle
            .max(c.at(ai, bi).value())
            .max(c.at(ai, bnext).value());
    }
    if swapped - assigned < -(tol * len as f64 * (1.0 + max_on_cycle)) {
        let witness = cycle_nodes.iter().map(|&u| pairs[u]).collect();
        Ok(Monotonicity::Violating(witness))
    } else {
        Ok(Monotonicity::Monotone)
    }
}

/// Outcome of the strong monotonicity test.
#[derive(Debug, Clone)]
pub enum StrongMonotonicity {
    /// Witness potentials: tight on the support, feasible on the mask.
    StronglyMonotone(PotentialPair),
    NotStronglyMonotone,
}

impl StrongMonotonicity {
    pub fn is_strongly_monotone(&self) -> bool {
        matches!(self, StrongMonotonicity::StronglyMonotone(_))
    }
}

/// Decides whether finite potentials tight on the plan's support and
/// feasible on the mask exist, by attempting to construct them.
pub fn strong_monotonicity_check(
    plan: &TransportPlan,
    c: &CostMatrix,
    tol: f64,
) -> Result<StrongMonotonicity> {
    let cfg = SolveConfig {
        tolerance: tol,
        ..SolveConfig::default()
    };
    match extract_potentials(plan, c, &cfg) {
        Ok(p) => Ok(StrongMonotonicity::StronglyMonotone(p)),
        Err(Error::NotCertifiable(_)) => Ok(StrongMonotonicity::NotStronglyMonotone),
        Err(e) => Err(e),
    }
}

/// The three classic side conditions, reported as plain booleans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Diagnostics {
    /// A finite separable bound `c ≤ c_A ⊕ c_B` with integrable parts
    /// exists; on a finite space that happens exactly when `c` is finite
    /// everywhere.
    pub separable_bound: bool,
    /// Positive marginal mass of rows with finite `ν`-weighted cost, and the
    /// symmetric column condition.
    pub marginal_moment: bool,
    /// `μ ⊗ ν` puts mass 1 on `{c < ∞}`.
    pub product_finite_mass: bool,
}

pub fn diagnostics(mu: &Marginal, nu: &Marginal, c: &CostMatrix) -> Result<Diagnostics> {
    let (m, n) = (mu.len(), nu.len());
    if c.rows() != m || c.cols() != n {
        return Err(Error::DimensionMismatch(
            "cost and marginals must share dimensions".into(),
        ));
    }
    let separable_bound = c.finite_count() == m * n;

    // row i integrates c(i, ·) against ν iff no ν-massive cell is infinite
    let row_ok = |i: usize| (0..n).all(|j| nu.weight(j) == 0.0 || c.is_finite_at(i, j));
    let col_ok = |j: usize| (0..m).all(|i| mu.weight(i) == 0.0 || c.is_finite_at(i, j));
    let mu_mass: f64 = (0..m).filter(|&i| row_ok(i)).map(|i| mu.weight(i)).sum();
    let nu_mass: f64 = (0..n).filter(|&j| col_ok(j)).map(|j| nu.weight(j)).sum();
    let marginal_moment = mu_mass > 0.0 && nu_mass > 0.0;

    let product_mass: f64 = c
        .finite_cells()
        .map(|(i, j)| mu.weight(i) * nu.weight(j))
        .sum();
    let product_finite_mass = (product_mass - 1.0).abs() <= 1e-12;

    Ok(Diagnostics {
        separable_bound,
        marginal_moment,
        product_finite_mass,
    })
}

/// Bundles a plan and potentials with freshly computed values and verdicts.
///
/// The strengthened verdict is evaluated against the normalized cost, with
/// `ψ` shifted accordingly, so the stored pair stays expressed against the
/// caller's original cost.
pub fn build_certificate(
    mu: &Marginal,
    nu: &Marginal,
    c: &CostMatrix,
    plan: &TransportPlan,
    p: &PotentialPair,
    cfg: &SolveConfig,
) -> Result<Certificate> {
    let report = duality_gap(mu, nu, c, plan, p, cfg)?;

    let strengthened_bound = match c.normalize() {
        Ok((c_norm, shift)) => {
            let shifted = PotentialPair::new(p.phi().clone(), p.psi().mapv(|x| x + shift))?;
            verify_strengthened_certificate(
                plan,
                &c_norm,
                &shifted,
                cfg.tolerance,
                cfg.support_threshold,
            )?
            .passed()
        }
        Err(_) => false,
    };

    let support = SupportSet::from_plan(plan, cfg.support_threshold);
    let cyclically_monotone = match cyclical_monotonicity_check(&support, c, cfg.tolerance) {
        Ok(Monotonicity::Monotone) => true,
        Ok(Monotonicity::Violating(_)) => false,
        Err(_) => false, // support off the mask: outside the definition
    };

    Ok(Certificate {
        plan: plan.clone(),
        potentials: p.clone(),
        primal_value: report.primal_value,
        dual_value: report.dual_value,
        gap: report.gap,
        verdicts: Verdicts {
            feasible_everywhere: report.feasible_everywhere,
            tight_on_support: report.tight_on_support,
            strengthened_bound,
            cyclically_monotone,
        },
        tolerance: cfg.tolerance,
    })
}
