use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};

/// A value in `[0, ∞]`, the codomain of cost functions.
///
/// Backed by the host floating-point infinity. `NaN` and negative values are
/// rejected at construction, and no subtraction is provided, so `∞ − ∞` can
/// never be formed.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal(0.0);
    pub const INFINITY: ExtReal = ExtReal(f64::INFINITY);

    /// Wraps a raw float, accepting finite nonnegative values and `+∞`.
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() {
            return Err(Error::InvalidValue("NaN is not an extended real".into()));
        }
        if value < 0.0 {
            return Err(Error::InvalidValue(format!(
                "extended reals are nonnegative, got {value}"
            )));
        }
        // normalize -0.0
        Ok(ExtReal(value + 0.0))
    }

    /// Like [`ExtReal::new`] but also rejects `+∞`.
    pub fn finite(value: f64) -> Result<Self> {
        if value.is_infinite() {
            return Err(Error::InvalidValue("expected a finite value".into()));
        }
        Self::new(value)
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_infinite(&self) -> bool {
        self.0.is_infinite()
    }

    /// The underlying float (`f64::INFINITY` for `∞`).
    pub fn value(&self) -> f64 {
        self.0
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    // finite + ∞ = ∞; both operands are ≥ 0 so the sum is well-defined.
    fn add(self, rhs: ExtReal) -> ExtReal {
        ExtReal(self.0 + rhs.0)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}
