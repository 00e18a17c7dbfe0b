use ndarray::{Array1, Array2};

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::marginal::Marginal;

/// Default absolute mass threshold deciding when a cell counts as support.
pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-10;

/// A nonnegative coupling matrix with marginal-residual bookkeeping.
///
/// Residuals are achieved-marginal minus target-marginal; they record how far
/// the stored masses are from the `(μ, ν)` the plan was built against.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    mass: Array2<f64>,
    row_residual: Array1<f64>,
    col_residual: Array1<f64>,
}

impl TransportPlan {
    /// Validates a mass matrix against its target marginals.
    ///
    /// Entries in `[-tol, 0)` are clipped to zero; anything more negative is
    /// rejected, as are NaNs and totals off `1` by more than `tol`.
    pub fn new(mass: Array2<f64>, mu: &Marginal, nu: &Marginal, tol: f64) -> Result<Self> {
        let (m, n) = mass.dim();
        if m != mu.len() || n != nu.len() {
            return Err(Error::DimensionMismatch(format!(
                "plan is {m}x{n}, marginals are {}x{}",
                mu.len(),
                nu.len()
            )));
        }
        let mut clipped = mass;
        for ((i, j), v) in clipped.indexed_iter_mut() {
            if v.is_nan() {
                return Err(Error::InvalidValue(format!("mass[{i}][{j}] is NaN")));
            }
            if *v < -tol {
                return Err(Error::InvalidValue(format!(
                    "mass[{i}][{j}] = {v} is below -tol = {}",
                    -tol
                )));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let total: f64 = clipped.sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidValue(format!(
                "plan mass sums to {total}, expected 1 within {tol}"
            )));
        }
        let row_residual = Array1::from_iter((0..m).map(|i| clipped.row(i).sum() - mu.weight(i)));
        let col_residual =
            Array1::from_iter((0..n).map(|j| clipped.column(j).sum() - nu.weight(j)));
        Ok(TransportPlan {
            mass: clipped,
            row_residual,
            col_residual,
        })
    }

    pub fn rows(&self) -> usize {
        self.mass.nrows()
    }

    pub fn cols(&self) -> usize {
        self.mass.ncols()
    }

    pub fn mass(&self) -> &Array2<f64> {
        &self.mass
    }

    pub fn mass_at(&self, i: usize, j: usize) -> f64 {
        self.mass[[i, j]]
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.sum()
    }

    pub fn row_residual(&self) -> &Array1<f64> {
        &self.row_residual
    }

    pub fn col_residual(&self) -> &Array1<f64> {
        &self.col_residual
    }

    /// Largest absolute marginal deviation.
    pub fn max_residual(&self) -> f64 {
        self.row_residual
            .iter()
            .chain(self.col_residual.iter())
            .fold(0.0, |acc, r| acc.max(r.abs()))
    }

    /// Cells with mass strictly above `threshold`, row-major.
    pub fn support(&self, threshold: f64) -> Vec<(usize, usize)> {
        self.mass
            .indexed_iter()
            .filter(|(_, &v)| v > threshold)
            .map(|((i, j), _)| (i, j))
            .collect()
    }
}

/// Transport cost `Σ mass[i][j] · c[i][j]` with the convention `0 · ∞ = 0`.
///
/// Returns `+∞` exactly when some cell with strictly positive mass has
/// infinite cost.
pub fn plan_cost(plan: &TransportPlan, c: &CostMatrix) -> Result<ExtReal> {
    if plan.rows() != c.rows() || plan.cols() != c.cols() {
        return Err(Error::DimensionMismatch(format!(
            "plan is {}x{}, cost is {}x{}",
            plan.rows(),
            plan.cols(),
            c.rows(),
            c.cols()
        )));
    }
    let mut total = 0.0;
    for ((i, j), &mass) in plan.mass().indexed_iter() {
        if mass == 0.0 {
            continue;
        }
        let cost = c.at(i, j);
        if cost.is_infinite() {
            return Ok(ExtReal::INFINITY);
        }
        total += mass * cost.value();
    }
    ExtReal::new(total)
}
