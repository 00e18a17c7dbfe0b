//! Moreau–Yosida regularization on finite metric spaces.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// A finite metric space: point count plus a distance matrix, validated for
/// symmetry, zero diagonal, strict positivity off the diagonal, and the
/// triangle inequality (all within `1e-12`).
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    dist: Array2<f64>,
}

const METRIC_TOL: f64 = 1e-12;

impl FiniteMetricSpace {
    pub fn new(dist: Array2<f64>) -> Result<Self> {
        let (r, c) = dist.dim();
        if r != c || r == 0 {
            return Err(Error::InvalidMetric(format!(
                "distance matrix must be square, got {r}x{c}"
            )));
        }
        for ((i, j), &d) in dist.indexed_iter() {
            if !d.is_finite() {
                return Err(Error::InvalidMetric(format!(
                    "d[{i}][{j}] = {d} is not finite"
                )));
            }
            if i == j && d.abs() > METRIC_TOL {
                return Err(Error::InvalidMetric(format!(
                    "nonzero diagonal d[{i}][{i}] = {d}"
                )));
            }
            if i != j && d <= 0.0 {
                return Err(Error::InvalidMetric(format!(
                    "d[{i}][{j}] = {d} must be > 0"
                )));
            }
            if (d - dist[[j, i]]).abs() > METRIC_TOL {
                return Err(Error::InvalidMetric(format!("asymmetry at ({i},{j})")));
            }
        }
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    if dist[[i, k]] > dist[[i, j]] + dist[[j, k]] + METRIC_TOL {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails on ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(FiniteMetricSpace { dist })
    }

    /// The line `0, 1, …, n−1` with distance `|i − j|`.
    pub fn line(n: usize) -> Result<Self> {
        Self::new(Array2::from_shape_fn((n, n), |(i, j)| {
            (i as f64 - j as f64).abs()
        }))
    }

    pub fn len(&self) -> usize {
        self.dist.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn dist(&self, x: usize, y: usize) -> f64 {
        self.dist[[x, y]]
    }

    /// Product space under the sum metric `d((a,b),(a',b')) = d_A(a,a') +
    /// d_B(b,b')`; point `(i, j)` maps to index `i · |B| + j`.
    pub fn product(&self, other: &FiniteMetricSpace) -> Result<FiniteMetricSpace> {
        let (na, nb) = (self.len(), other.len());
        let dist = Array2::from_shape_fn((na * nb, na * nb), |(x, y)| {
            let (ia, ib) = (x / nb, x % nb);
            let (ja, jb) = (y / nb, y % nb);
            self.dist(ia, ja) + other.dist(ib, jb)
        });
        FiniteMetricSpace::new(dist)
    }
}

/// A `(−∞, +∞]`-valued function on a finite point set, somewhere finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtFunction {
    values: Array1<f64>,
}

impl ExtFunction {
    pub fn new(values: Array1<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidValue(
                "function needs at least one point".into(),
            ));
        }
        for (i, &v) in values.iter().enumerate() {
            if v.is_nan() || v == f64::NEG_INFINITY {
                return Err(Error::InvalidValue(format!(
                    "value[{i}] = {v} is not in (-inf, inf]"
                )));
            }
        }
        if values.iter().all(|v| v.is_infinite()) {
            return Err(Error::InvalidValue("function is identically +inf".into()));
        }
        Ok(ExtFunction { values })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(Array1::from(values.to_vec()))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, x: usize) -> f64 {
        self.values[x]
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }
}

/// The Moreau–Yosida approximation `v[x] = min_y ( u[y] + k · d(x, y) )`.
///
/// `v ≤ u` pointwise, `v` is `k`-Lipschitz, finite everywhere, and increases
/// pointwise to `u` as `k → ∞` wherever `u` is finite.
pub fn moreau_yosida(u: &ExtFunction, k: f64, space: &FiniteMetricSpace) -> Result<ExtFunction> {
    if u.len() != space.len() {
        return Err(Error::DimensionMismatch(format!(
            "function has {} points, space has {}",
            u.len(),
            space.len()
        )));
    }
    if !k.is_finite() || k < 0.0 {
        return Err(Error::InvalidValue(format!(
            "k must be a finite nonnegative real, got {k}"
        )));
    }
    let n = u.len();
    let values = Array1::from_shape_fn(n, |x| {
        (0..n)
            .map(|y| u.value(y) + k * space.dist(x, y))
            .fold(f64::INFINITY, f64::min)
    });
    ExtFunction::new(values)
}

/// Truncate above at `k`, then smooth: `moreau_yosida(min(c, k), k)`.
///
/// The output is finite, bounded by `k`, below `c`, and nondecreasing in `k`,
/// converging pointwise to `c`.
pub fn capped_approximants(
    c: &ExtFunction,
    k: f64,
    space: &FiniteMetricSpace,
) -> Result<ExtFunction> {
    if let Some((i, &v)) = c.values().iter().enumerate().find(|(_, &v)| v < 0.0) {
        return Err(Error::InvalidValue(format!(
            "cost value[{i}] = {v} must be >= 0"
        )));
    }
    let capped = ExtFunction::new(c.values().mapv(|v| v.min(k)))?;
    moreau_yosida(&capped, k, space)
}

/// Finite-scale surrogate of the factorization of lower-semicontinuous
/// envelopes over an outer sum: smoothing `φ ⊕ ψ` on the sum-metric product
/// space must equal the outer sum of the separately smoothed factors.
/// Checked at tolerance `1e-9`.
pub fn envelope_factorization_check(
    phi: &Array1<f64>,
    psi: &Array1<f64>,
    space_a: &FiniteMetricSpace,
    space_b: &FiniteMetricSpace,
    k: f64,
) -> Result<bool> {
    if phi.len() != space_a.len() || psi.len() != space_b.len() {
        return Err(Error::DimensionMismatch(
            "factor sizes must match their spaces".into(),
        ));
    }
    let (na, nb) = (space_a.len(), space_b.len());
    let product = space_a.product(space_b)?;
    let joint = ExtFunction::new(Array1::from_shape_fn(na * nb, |x| {
        phi[x / nb] + psi[x % nb]
    }))?;
    let smoothed_joint = moreau_yosida(&joint, k, &product)?;

    let phi_k = moreau_yosida(&ExtFunction::new(phi.clone())?, k, space_a)?;
    let psi_k = moreau_yosida(&ExtFunction::new(psi.clone())?, k, space_b)?;

    let ok = (0..na * nb).all(|x| {
        let split = phi_k.value(x / nb) + psi_k.value(x % nb);
        (smoothed_joint.value(x) - split).abs() <= 1e-9
    });
    Ok(ok)
}
