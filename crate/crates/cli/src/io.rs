//! JSON file schemas. Costs may contain the string `"inf"` for forbidden
//! cells since JSON has no native infinity; every emitted number that can be
//! infinite uses the same convention.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize, Serializer};

use otkit::certificates::Diagnostics;
use otkit::solver::FeasibilityCut;
use otkit::{CostMatrix, Error, ExtReal, Marginal, PotentialPair, TransportPlan, Verdicts};

/// A number or the string `"inf"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NumOrInf {
    Num(f64),
    Tag(String),
}

impl NumOrInf {
    pub fn to_f64(&self) -> Result<f64, String> {
        match self {
            NumOrInf::Num(v) => Ok(*v),
            NumOrInf::Tag(s) if s == "inf" => Ok(f64::INFINITY),
            NumOrInf::Tag(s) => Err(format!("expected a number or \"inf\", got \"{s}\"")),
        }
    }
}

/// Serializes finite floats as numbers and `+∞` as `"inf"`.
#[derive(Debug, Clone, Copy)]
pub struct ExtNum(pub f64);

impl Serialize for ExtNum {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            ser.serialize_f64(self.0)
        } else {
            ser.serialize_str("inf")
        }
    }
}

impl From<ExtReal> for ExtNum {
    fn from(v: ExtReal) -> Self {
        ExtNum(v.value())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub cost: Vec<Vec<NumOrInf>>,
    #[serde(default)]
    pub plan: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub phi: Option<Vec<f64>>,
    #[serde(default)]
    pub psi: Option<Vec<f64>>,
    #[serde(default)]
    pub labels_a: Option<Vec<String>>,
    #[serde(default)]
    pub labels_b: Option<Vec<String>>,
    #[serde(default)]
    pub support: Option<Vec<(usize, usize)>>,
    #[serde(default)]
    pub u: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub ell: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub kappa1: Option<Vec<f64>>,
    #[serde(default)]
    pub kappa2: Option<Vec<f64>>,
}

impl ProblemFile {
    pub fn marginals(&self) -> Result<(Marginal, Marginal), String> {
        let mu = match &self.labels_a {
            Some(l) => Marginal::with_labels(Array1::from(self.mu.clone()), l.clone()),
            None => Marginal::new(Array1::from(self.mu.clone())),
        }
        .map_err(|e| format!("mu: {e}"))?;
        let nu = match &self.labels_b {
            Some(l) => Marginal::with_labels(Array1::from(self.nu.clone()), l.clone()),
            None => Marginal::new(Array1::from(self.nu.clone())),
        }
        .map_err(|e| format!("nu: {e}"))?;
        Ok((mu, nu))
    }

    pub fn cost_matrix(&self) -> Result<CostMatrix, String> {
        let m = self.cost.len();
        if m == 0 {
            return Err("cost matrix is empty".into());
        }
        let n = self.cost[0].len();
        let mut rows = Vec::with_capacity(m);
        for (i, row) in self.cost.iter().enumerate() {
            if row.len() != n {
                return Err(format!(
                    "cost row {i} has {} entries, expected {n}",
                    row.len()
                ));
            }
            let mut out = Vec::with_capacity(n);
            for (j, e) in row.iter().enumerate() {
                let v = e.to_f64().map_err(|e| format!("cost[{i}][{j}]: {e}"))?;
                out.push(v);
            }
            rows.push(out);
        }
        if self.mu.len() != m || self.nu.len() != n {
            return Err(format!(
                "cost is {m}x{n} but mu has {} and nu has {} entries",
                self.mu.len(),
                self.nu.len()
            ));
        }
        CostMatrix::from_rows(&rows).map_err(|e| format!("cost: {e}"))
    }

    pub fn plan(&self, mu: &Marginal, nu: &Marginal, tol: f64) -> Result<TransportPlan, String> {
        let rows = self.plan.as_ref().ok_or("missing field: plan")?;
        let mass = matrix_from_rows(rows, "plan")?;
        TransportPlan::new(mass, mu, nu, tol).map_err(|e| format!("plan: {e}"))
    }

    pub fn potentials(&self) -> Result<PotentialPair, String> {
        let phi = self.phi.as_ref().ok_or("missing field: phi")?;
        let psi = self.psi.as_ref().ok_or("missing field: psi")?;
        PotentialPair::from_slices(phi, psi).map_err(|e| format!("potentials: {e}"))
    }
}

pub fn matrix_from_rows(rows: &[Vec<f64>], name: &str) -> Result<Array2<f64>, String> {
    if rows.is_empty() {
        return Err(format!("{name} is empty"));
    }
    let n = rows[0].len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(format!(
                "{name} row {i} has {} entries, expected {n}",
                r.len()
            ));
        }
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), n), flat).map_err(|e| format!("{name}: {e}"))
}

#[derive(Debug, Serialize)]
pub struct VerdictsOut {
    pub feasible_everywhere: bool,
    pub tight_on_support: bool,
    pub strengthened_bound: bool,
    pub cyclically_monotone: bool,
}

impl From<Verdicts> for VerdictsOut {
    fn from(v: Verdicts) -> Self {
        VerdictsOut {
            feasible_everywhere: v.feasible_everywhere,
            tight_on_support: v.tight_on_support,
            strengthened_bound: v.strengthened_bound,
            cyclically_monotone: v.cyclically_monotone,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DiagnosticsOut {
    pub separable_bound: bool,
    pub marginal_moment: bool,
    pub product_finite_mass: bool,
}

impl From<Diagnostics> for DiagnosticsOut {
    fn from(d: Diagnostics) -> Self {
        DiagnosticsOut {
            separable_bound: d.separable_bound,
            marginal_moment: d.marginal_moment,
            product_finite_mass: d.product_finite_mass,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CutOut {
    pub a_subset: Vec<usize>,
    pub b_neighbors: Vec<usize>,
    pub mu_mass: f64,
    pub nu_mass: f64,
}

impl From<&FeasibilityCut> for CutOut {
    fn from(c: &FeasibilityCut) -> Self {
        CutOut {
            a_subset: c.a_subset.clone(),
            b_neighbors: c.b_neighbors.clone(),
            mu_mass: c.mu_mass,
            nu_mass: c.nu_mass,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct WitnessOut {
    pub cell: (usize, usize),
    pub clause: String,
}

#[derive(Debug, Serialize)]
pub struct NormsOut {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost_norm: Option<ExtNum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_cost_norm: Option<ExtNum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginal_dual_norm: Option<ExtNum>,
}

/// The machine-readable result written to stdout (or `--out`). Fields not
/// produced by a command are omitted.
#[derive(Debug, Serialize)]
pub struct ResultFile {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<ExtNum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<ExtNum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdicts: Option<VerdictsOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cut: Option<CutOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle: Option<Vec<(usize, usize)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norms: Option<NormsOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl ResultFile {
    pub fn empty(status: &str) -> Self {
        ResultFile {
            status: status.to_string(),
            value: None,
            shift: None,
            plan: None,
            phi: None,
            psi: None,
            gap: None,
            verdicts: None,
            diagnostics: None,
            cut: None,
            witness: None,
            cycle: None,
            norms: None,
            timing_ms: None,
        }
    }
}

pub fn plan_to_rows(plan: &TransportPlan) -> Vec<Vec<f64>> {
    (0..plan.rows())
        .map(|i| (0..plan.cols()).map(|j| plan.mass_at(i, j)).collect())
        .collect()
}

/// Exit code for a library error that escaped parse-time validation.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::DimensionMismatch(_)
        | Error::InvalidValue(_)
        | Error::NotNormalized(_)
        | Error::InfiniteSupportCost(_, _) => 2,
        Error::InfeasibleMask | Error::EmptyFiniteSupport => 3,
        _ => 4,
    }
}
