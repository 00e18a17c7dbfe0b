use crate::ext_real::ExtReal;
use crate::plan::TransportPlan;
use crate::potential::PotentialPair;

/// Named boolean outcomes of the optimality checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Verdicts {
    /// `phi ⊕ psi ≤ c` on every cell (vacuous where `c = ∞`).
    pub feasible_everywhere: bool,
    /// `phi ⊕ psi = c` on every support cell.
    pub tight_on_support: bool,
    /// `|phi ⊕ psi| ≤ c` everywhere, with equality on support ∩ {c < ∞}.
    pub strengthened_bound: bool,
    /// The support admits no cost-decreasing cyclic reassignment.
    pub cyclically_monotone: bool,
}

impl Verdicts {
    pub fn all_pass(&self) -> bool {
        self.feasible_everywhere
            && self.tight_on_support
            && self.strengthened_bound
            && self.cyclically_monotone
    }
}

/// A plan, a potential pair, the primal/dual values they achieve, and the
/// verdicts (with their tolerance) under which the bundle was verified.
///
/// Verdicts are plain data: re-running the verification operations on the
/// stored plan and potentials reproduces them.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub plan: TransportPlan,
    pub potentials: PotentialPair,
    pub primal_value: ExtReal,
    pub dual_value: f64,
    /// `primal_value − dual_value` when the primal is finite, `+∞` otherwise.
    pub gap: f64,
    pub verdicts: Verdicts,
    pub tolerance: f64,
}
