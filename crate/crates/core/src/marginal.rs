use ndarray::Array1;

use crate::error::{Error, Result};

/// Tolerance on `Σ weights = 1`. Inputs outside it are rejected, never
/// silently renormalized.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// A probability vector over a finite index set, with optional point labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    weights: Array1<f64>,
    labels: Option<Vec<String>>,
}

impl Marginal {
    pub fn new(weights: Array1<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidValue(
                "marginal must have at least one point".into(),
            ));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::InvalidValue(format!(
                    "weight {i} is not finite: {w}"
                )));
            }
            if w < 0.0 {
                return Err(Error::InvalidValue(format!("weight {i} is negative: {w}")));
            }
        }
        let sum: f64 = weights.sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::NotNormalized(sum));
        }
        Ok(Marginal {
            weights,
            labels: None,
        })
    }

    pub fn from_slice(weights: &[f64]) -> Result<Self> {
        Self::new(Array1::from(weights.to_vec()))
    }

    pub fn with_labels(weights: Array1<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} weights",
                labels.len(),
                weights.len()
            )));
        }
        let mut m = Self::new(weights)?;
        m.labels = Some(labels);
        Ok(m)
    }

    /// Uniform distribution on `n` points.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidValue("uniform marginal needs n >= 1".into()));
        }
        // Build as 1/n per point; the sum check tolerates the rounding.
        Self::new(Array1::from_elem(n, 1.0 / n as f64))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &Array1<f64> {
        &self.weights
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }
}
