use ndarray::Array2;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;

/// An `m × n` matrix of extended-real costs.
///
/// The finite-support mask `S = {(i,j) : c[i][j] < ∞}` is computed once at
/// construction; the matrix is immutable afterwards, so the cache can never
/// go stale.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    entries: Array2<ExtReal>,
    finite_mask: Array2<bool>,
    finite_count: usize,
}

impl CostMatrix {
    pub fn new(entries: Array2<ExtReal>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::InvalidValue("cost matrix must be nonempty".into()));
        }
        let finite_mask = entries.map(|e| e.is_finite());
        let finite_count = finite_mask.iter().filter(|&&b| b).count();
        Ok(CostMatrix {
            entries,
            finite_mask,
            finite_count,
        })
    }

    /// Builds from raw floats; `f64::INFINITY` marks forbidden cells.
    pub fn from_f64(raw: &Array2<f64>) -> Result<Self> {
        let mut entries = Array2::from_elem(raw.dim(), ExtReal::ZERO);
        for ((i, j), &v) in raw.indexed_iter() {
            entries[[i, j]] = ExtReal::new(v).map_err(|_| {
                Error::InvalidValue(format!("cost[{i}][{j}] = {v} is not in [0, inf]"))
            })?;
        }
        Self::new(entries)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidValue("cost matrix must be nonempty".into()));
        }
        let m = rows.len();
        let n = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {n}",
                    r.len()
                )));
            }
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let raw =
            Array2::from_shape_vec((m, n), flat).map_err(|e| Error::InvalidValue(e.to_string()))?;
        Self::from_f64(&raw)
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn at(&self, i: usize, j: usize) -> ExtReal {
        self.entries[[i, j]]
    }

    pub fn entries(&self) -> &Array2<ExtReal> {
        &self.entries
    }

    pub fn is_finite_at(&self, i: usize, j: usize) -> bool {
        self.finite_mask[[i, j]]
    }

    pub fn finite_count(&self) -> usize {
        self.finite_count
    }

    /// Iterates the cells of `S` in row-major order.
    pub fn finite_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.finite_mask
            .indexed_iter()
            .filter(|(_, &f)| f)
            .map(|((i, j), _)| (i, j))
    }

    pub fn min_finite(&self) -> Option<f64> {
        self.entries
            .iter()
            .filter(|e| e.is_finite())
            .map(|e| e.value())
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.min(v))))
    }

    pub fn max_finite(&self) -> Option<f64> {
        self.entries
            .iter()
            .filter(|e| e.is_finite())
            .map(|e| e.value())
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }

    /// Shifts all finite entries so the minimum finite entry becomes exactly 1.
    ///
    /// Returns the shifted matrix and the applied `shift = 1 − min_finite`.
    /// Values relate by `value(c) = value(c') − shift` for any unit-mass plan
    /// with finite cost. Errors when every entry is infinite.
    pub fn normalize(&self) -> Result<(CostMatrix, f64)> {
        let min = self.min_finite().ok_or(Error::EmptyFiniteSupport)?;
        let shift = 1.0 - min;
        let mut entries = self.entries.clone();
        for e in entries.iter_mut() {
            if e.is_finite() {
                let v = e.value();
                // pin the minimum to 1 exactly; shifted values stay >= 1 - 1ulp
                *e = if v == min {
                    ExtReal::new(1.0)?
                } else {
                    ExtReal::new(v + shift)?
                };
            }
        }
        Ok((CostMatrix::new(entries)?, shift))
    }
}
