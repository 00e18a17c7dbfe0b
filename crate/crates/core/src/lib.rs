//! Discrete optimal-transport solver and optimality-certification toolkit.
//!
//! Given two probability vectors and an extended-real cost matrix (entries in
//! `[0, ∞]`), this crate solves the transport problem exactly, extracts dual
//! potentials, verifies and strengthens optimality certificates, checks
//! cyclical monotonicity, and provides the cost-weighted norm and
//! regularization toolbox that accompanies the duality theory.
//!
//! Infinite costs are first-class: forbidden cells are simply deleted from
//! the network, feasibility over the remaining mask is decided by max-flow
//! with an explicit violating-cut witness, and every certificate treats
//! `c = ∞` cells as vacuous constraints.

pub mod analysis;
pub mod certificate;
pub mod certificates;
pub mod cost;
pub mod duality;
pub mod error;
pub mod ext_real;
pub mod marginal;
pub mod plan;
pub mod potential;
pub mod solver;

pub use certificate::{Certificate, Verdicts};
pub use cost::CostMatrix;
pub use error::{Error, Result};
pub use ext_real::ExtReal;
pub use marginal::{Marginal, PROB_SUM_TOL};
pub use plan::{plan_cost, TransportPlan, DEFAULT_SUPPORT_THRESHOLD};
pub use potential::{oplus, PotentialPair};
