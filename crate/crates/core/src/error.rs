use thiserror::Error;

use crate::plan::TransportPlan;

/// Error variants shared by the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes of two inputs do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A numeric input violates a domain invariant (NaN, negative mass, ...).
    #[error("invalid value: {0}")]
    InvalidValue(String),

    /// Marginal weights do not sum to 1 within tolerance.
    #[error("marginal weights must sum to 1, got {0}")]
    NotNormalized(f64),

    /// Every cost entry is infinite, so there is nothing to normalize or route.
    #[error("empty finite support: every cost entry is infinite")]
    EmptyFiniteSupport,

    /// Brute-force enumeration guard.
    #[error("instance too large for enumeration: {cells} cells exceeds limit {limit}")]
    InstanceTooLarge { cells: usize, limit: usize },

    /// The finite-cost mask admits no coupling at all.
    #[error("no finite-cost coupling exists for the given mask")]
    InfeasibleMask,

    /// Pivot budget exhausted; carries the best feasible plan found so far.
    #[error("iteration limit {limit} exceeded")]
    IterationLimit {
        limit: usize,
        best: Box<TransportPlan>,
    },

    /// The tight/feasible potential system is unsatisfiable for this plan.
    #[error("plan is not certifiable: {0}")]
    NotCertifiable(String),

    /// Contrapositive of the strengthened-potential existence theorem.
    #[error("plan is not optimal: {0}")]
    PlanNotOptimal(String),

    /// The two signed marginals carry different total mass.
    #[error("marginal mass mismatch: {0} vs {1}")]
    MassMismatch(f64, f64),

    /// A support pair sits on an infinite-cost cell.
    #[error("support pair ({0}, {1}) has infinite cost")]
    InfiniteSupportCost(usize, usize),

    /// The plan puts mass on an infinite-cost cell.
    #[error("plan has infinite cost")]
    InfinitePlanCost,

    /// Conjugate estimation found no usable sample.
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    /// Distance matrix is not a metric.
    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    /// Internal numerical failure (lost feasibility, unbounded ratio, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
