use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// A pair of finite dual potential vectors, `phi` on row points and `psi` on
/// column points.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPair {
    phi: Array1<f64>,
    psi: Array1<f64>,
}

impl PotentialPair {
    /// Every entry must be finite; the characterization theorems this pair
    /// certifies are stated for finitely-valued potentials only.
    pub fn new(phi: Array1<f64>, psi: Array1<f64>) -> Result<Self> {
        for (name, v) in [("phi", &phi), ("psi", &psi)] {
            if let Some((i, &bad)) = v.iter().enumerate().find(|(_, x)| !x.is_finite()) {
                return Err(Error::InvalidValue(format!(
                    "{name}[{i}] = {bad} is not finite"
                )));
            }
        }
        Ok(PotentialPair { phi, psi })
    }

    pub fn from_slices(phi: &[f64], psi: &[f64]) -> Result<Self> {
        Self::new(Array1::from(phi.to_vec()), Array1::from(psi.to_vec()))
    }

    pub fn phi(&self) -> &Array1<f64> {
        &self.phi
    }

    pub fn psi(&self) -> &Array1<f64> {
        &self.psi
    }

    /// The matrix `phi[i] + psi[j]`.
    pub fn oplus(&self) -> Array2<f64> {
        oplus(&self.phi, &self.psi)
    }

    pub fn sum_at(&self, i: usize, j: usize) -> f64 {
        self.phi[i] + self.psi[j]
    }
}

/// Outer sum: entry `(i, j)` is `phi[i] + psi[j]`.
pub fn oplus(phi: &Array1<f64>, psi: &Array1<f64>) -> Array2<f64> {
    let m = phi.len();
    let n = psi.len();
    Array2::from_shape_fn((m, n), |(i, j)| phi[i] + psi[j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_case() {
        assert_eq!(oplus(&array![0.0], &array![0.0]), array![[0.0]]);
    }

    #[test]
    fn direct_addition() {
        assert_eq!(
            oplus(&array![0.0, -1.0], &array![1.0, 2.0]),
            array![[1.0, 2.0], [0.0, 1.0]]
        );
        assert_eq!(oplus(&array![1.0], &array![-1.0, 3.0]), array![[0.0, 4.0]]);
    }

    #[test]
    fn shift_invariance_of_the_sum() {
        let phi = array![0.3, -2.0, 1.5];
        let psi = array![0.25, 4.0];
        let base = oplus(&phi, &psi);
        for t in [0.5, -8.0, 2.0_f64.powi(10)] {
            let shifted = oplus(&phi.mapv(|x| x + t), &psi.mapv(|x| x - t));
            for (a, b) in base.iter().zip(shifted.iter()) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn potentials_must_be_finite() {
        assert!(PotentialPair::from_slices(&[0.0, f64::INFINITY], &[1.0]).is_err());
        assert!(PotentialPair::from_slices(&[0.0], &[f64::NAN]).is_err());
        assert!(PotentialPair::from_slices(&[-5.0], &[7.0]).is_ok());
    }
}
