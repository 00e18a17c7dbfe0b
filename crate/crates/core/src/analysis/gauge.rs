//! Gauge functionals of convex level sets, with a numerical sandwich check
//! tying the support function of `{θ ≤ 1}` to the gauge of the conjugate's
//! unit level set.

use crate::error::{Error, Result};

const ALPHA_MIN: f64 = 1e-12;
const ALPHA_MAX: f64 = 1e12;
const BISECT_TOL: f64 = 1e-8;
const GRID_LIMIT: usize = 2_000_000;

/// Bounds and resolution of the sampling grid used for conjugate estimation.
#[derive(Debug, Clone)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Points per dimension.
    pub resolution: usize,
}

type Evaluator = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A black-box convex function `θ ≥ 0` with `θ(0) = 0` on a space of
/// dimension at most 3, together with a sampling box.
pub struct GaugeProbe {
    evaluator: Evaluator,
    dim: usize,
    sample_box: SampleBox,
}

impl GaugeProbe {
    pub fn new(
        dim: usize,
        evaluator: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        sample_box: SampleBox,
    ) -> Result<Self> {
        if dim == 0 || dim > 3 {
            return Err(Error::InvalidValue(format!(
                "probe dimension must be 1..=3, got {dim}"
            )));
        }
        if sample_box.lo.len() != dim || sample_box.hi.len() != dim {
            return Err(Error::DimensionMismatch(
                "sample box bounds must match dim".into(),
            ));
        }
        if sample_box.resolution < 2 {
            return Err(Error::InvalidValue(
                "sample box needs resolution >= 2".into(),
            ));
        }
        if sample_box.resolution.pow(dim as u32) > GRID_LIMIT {
            return Err(Error::InvalidValue("sample grid too large".into()));
        }
        for k in 0..dim {
            let (lo, hi) = (sample_box.lo[k], sample_box.hi[k]);
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(Error::InvalidValue(format!(
                    "sample box is empty in dimension {k}"
                )));
            }
        }
        let origin = vec![0.0; dim];
        let at_zero = evaluator(&origin);
        if at_zero.is_nan() || at_zero.abs() > 1e-12 {
            return Err(Error::InvalidValue(format!(
                "theta(0) must be 0, got {at_zero}"
            )));
        }
        Ok(GaugeProbe {
            evaluator: Box::new(evaluator),
            dim,
            sample_box,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluates `θ`; NaN is treated as `+∞` (outside the domain).
    pub fn theta(&self, s: &[f64]) -> f64 {
        let v = (self.evaluator)(s);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    fn grid_points(&self) -> Vec<Vec<f64>> {
        let res = self.sample_box.resolution;
        let steps: Vec<f64> = (0..self.dim)
            .map(|k| (self.sample_box.hi[k] - self.sample_box.lo[k]) / (res - 1) as f64)
            .collect();
        let total = res.pow(self.dim as u32);
        let mut points = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            let mut p = vec![0.0; self.dim];
            for k in 0..self.dim {
                let t = rem % res;
                rem /= res;
                p[k] = self.sample_box.lo[k] + t as f64 * steps[k];
            }
            points.push(p);
        }
        points
    }
}

/// The gauge `j_θ(s) = inf { α > 0 : θ(s/α) ≤ 1 }`, computed by bisection.
///
/// The map `α ↦ θ(s/α)` is nonincreasing because `θ` is convex with
/// `θ(0) = 0`, so the feasible `α` form an upper interval. Returns `+∞` when
/// no admissible `α` exists within the configured bounds, and `0` when every
/// positive `α` is admissible (recession directions).
pub fn gauge(probe: &GaugeProbe, s: &[f64]) -> Result<f64> {
    if s.len() != probe.dim() {
        return Err(Error::DimensionMismatch(format!(
            "point has dimension {}, probe has {}",
            s.len(),
            probe.dim()
        )));
    }
    bisect_gauge(|x| probe.theta(x), s)
}

fn bisect_gauge(eval: impl Fn(&[f64]) -> f64, s: &[f64]) -> Result<f64> {
    if s.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let scaled = |alpha: f64| -> f64 {
        let pt: Vec<f64> = s.iter().map(|&x| x / alpha).collect();
        eval(&pt)
    };

    let mut hi = 1.0;
    while scaled(hi) > 1.0 {
        hi *= 2.0;
        if hi > ALPHA_MAX {
            return Ok(f64::INFINITY);
        }
    }
    let mut lo = hi;
    loop {
        let next = lo / 2.0;
        if next < ALPHA_MIN {
            return Ok(0.0); // admissible arbitrarily close to zero
        }
        if scaled(next) > 1.0 {
            lo = next;
            break;
        }
        lo = next;
    }

    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if scaled(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The three numbers of the sandwich `½ j_{θ*}(r) ≤ δ*_{C_θ}(r) ≤ 2 j_{θ*}(r)`
/// and the verdict at 5% grid tolerance.
#[derive(Debug, Clone, Copy)]
pub struct SandwichReport {
    /// `½ · j_{θ*}(r)`.
    pub lhs: f64,
    /// The support function `δ*_{C_θ}(r) = sup { ⟨r, s⟩ : θ(s) ≤ 1 }`.
    pub mid: f64,
    /// `2 · j_{θ*}(r)`.
    pub rhs: f64,
    pub pass: bool,
}

/// Estimates the convex conjugate on the probe's grid, derives the gauge of
/// its unit level set by bisection, estimates the support function of
/// `{θ ≤ 1}` on the same grid, and checks the two-sided bound.
///
/// The caller is responsible for a sample box large enough that the grid
/// estimates have stabilized; the 5% acceptance slack absorbs
/// discretization.
pub fn gauge_sandwich_check(probe: &GaugeProbe, r: &[f64]) -> Result<SandwichReport> {
    if r.len() != probe.dim() {
        return Err(Error::DimensionMismatch(format!(
            "dual point has dimension {}, probe has {}",
            r.len(),
            probe.dim()
        )));
    }
    let points = probe.grid_points();
    let thetas: Vec<f64> = points.iter().map(|p| probe.theta(p)).collect();
    if thetas.iter().all(|t| t.is_infinite()) {
        return Err(Error::DegenerateGrid(
            "theta is infinite on every sample".into(),
        ));
    }

    // grid estimate of θ*(y) = sup_s ⟨y, s⟩ − θ(s); the true conjugate is
    // nonnegative because θ(0) = 0
    let conj = |y: &[f64]| -> f64 {
        let mut best = f64::NEG_INFINITY;
        for (p, &t) in points.iter().zip(thetas.iter()) {
            if t.is_infinite() {
                continue;
            }
            let dot: f64 = p.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
            best = best.max(dot - t);
        }
        best.max(0.0)
    };

    let j_star = bisect_gauge(conj, r)?;

    let mut support = f64::NEG_INFINITY;
    for (p, &t) in points.iter().zip(thetas.iter()) {
        if t <= 1.0 {
            let dot: f64 = p.iter().zip(r.iter()).map(|(a, b)| a * b).sum();
            support = support.max(dot);
        }
    }
    if support == f64::NEG_INFINITY {
        return Err(Error::DegenerateGrid(
            "no sample satisfies theta <= 1".into(),
        ));
    }
    let mid = support.max(0.0); // 0 always lies in {θ ≤ 1}

    let lhs = 0.5 * j_star;
    let rhs = 2.0 * j_star;
    const SLACK: f64 = 0.05;
    let pass = lhs <= mid * (1.0 + SLACK) + 1e-9 && mid <= rhs * (1.0 + SLACK) + 1e-9;
    Ok(SandwichReport {
        lhs,
        mid,
        rhs,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn box1(lo: f64, hi: f64, res: usize) -> SampleBox {
        SampleBox {
            lo: vec![lo],
            hi: vec![hi],
            resolution: res,
        }
    }

    fn quadratic_probe() -> GaugeProbe {
        GaugeProbe::new(1, |s: &[f64]| s[0] * s[0], box1(-10.0, 10.0, 4001)).unwrap()
    }

    #[test]
    fn probe_rejects_nonzero_origin() {
        assert!(GaugeProbe::new(1, |s: &[f64]| s[0] + 1.0, box1(-1.0, 1.0, 11)).is_err());
    }

    #[test]
    fn gauge_of_square_is_absolute_value() {
        let p = quadratic_probe();
        // θ(3/α) ≤ 1 ⟺ α ≥ 3
        assert!((gauge(&p, &[3.0]).unwrap() - 3.0).abs() < 1e-6);
    }

    #[test]
    fn gauge_of_absolute_value() {
        let p = GaugeProbe::new(1, |s: &[f64]| s[0].abs(), box1(-10.0, 10.0, 4001)).unwrap();
        assert!((gauge(&p, &[-4.0]).unwrap() - 4.0).abs() < 1e-6);
    }

    #[test]
    fn gauge_of_asymmetric_indicator() {
        // θ = 0 on [−1, 2], +∞ outside; j(4) = inf{α : 4/α ≤ 2} = 2
        let p = GaugeProbe::new(
            1,
            |s: &[f64]| {
                if (-1.0..=2.0).contains(&s[0]) {
                    0.0
                } else {
                    f64::INFINITY
                }
            },
            box1(-4.0, 4.0, 1601),
        )
        .unwrap();
        assert!((gauge(&p, &[4.0]).unwrap() - 2.0).abs() < 1e-6);
        assert!((gauge(&p, &[-3.0]).unwrap() - 3.0).abs() < 1e-6);
    }

    #[test]
    fn gauge_positive_homogeneity() {
        let p = quadratic_probe();
        let base = gauge(&p, &[1.7]).unwrap();
        for t in [2.0, 5.0, 0.25] {
            let scaled = gauge(&p, &[1.7 * t]).unwrap();
            assert!((scaled - t * base).abs() < 1e-6 * (1.0 + t * base));
        }
    }

    #[test]
    fn sandwich_for_square_matches_closed_form() {
        // θ = x²: θ*(r) = r²/4, j_{θ*}(r) = |r|/2, δ*(r) = |r|
        let p = quadratic_probe();
        let rep = gauge_sandwich_check(&p, &[2.0]).unwrap();
        assert!(rep.pass);
        assert!((rep.lhs - 0.5).abs() < 0.05, "lhs = {}", rep.lhs);
        assert!((rep.mid - 2.0).abs() < 0.05, "mid = {}", rep.mid);
        assert!((rep.rhs - 2.0).abs() < 0.05, "rhs = {}", rep.rhs);
    }

    #[test]
    fn sandwich_for_absolute_value_matches_closed_form() {
        // θ = |x|: j_{θ*}(r) = |r|, δ*(r) = |r|. The conjugate is an
        // indicator, so the grid estimate needs a wide box to stabilize.
        let p = GaugeProbe::new(1, |s: &[f64]| s[0].abs(), box1(-1000.0, 1000.0, 40001)).unwrap();
        let rep = gauge_sandwich_check(&p, &[3.0]).unwrap();
        assert!(rep.pass);
        assert!((rep.lhs - 1.5).abs() < 0.05, "lhs = {}", rep.lhs);
        assert!((rep.mid - 3.0).abs() < 0.05, "mid = {}", rep.mid);
        assert!((rep.rhs - 6.0).abs() < 0.05, "rhs = {}", rep.rhs);
    }

    #[test]
    fn sandwich_at_zero_is_trivial() {
        let p = quadratic_probe();
        let rep = gauge_sandwich_check(&p, &[0.0]).unwrap();
        assert!(rep.pass);
        assert_eq!((rep.lhs, rep.mid, rep.rhs), (0.0, 0.0, 0.0));
    }

    #[test]
    fn degenerate_grid_is_an_error() {
        let p = GaugeProbe::new(
            1,
            |s: &[f64]| if s[0] == 0.0 { 0.0 } else { f64::INFINITY },
            box1(1.0, 2.0, 11),
        )
        .unwrap();
        assert!(matches!(
            gauge_sandwich_check(&p, &[1.0]),
            Err(Error::DegenerateGrid(_))
        ));
    }
}
