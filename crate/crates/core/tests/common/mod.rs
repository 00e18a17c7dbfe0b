//! Shared instance generators for the integration suites. Everything is
//! seeded, so failures reproduce bit-for-bit.

// not every test binary uses every helper
#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use otkit::solver::{
    finite_cost_feasible, solve_mk, Feasibility, MkSolution, SolveConfig, SolveResult,
};
use otkit::{CostMatrix, Marginal, TransportPlan};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub struct Instance {
    pub mu: Marginal,
    pub nu: Marginal,
    pub cost: CostMatrix,
    pub masked: bool,
}

pub fn random_marginal(rng: &mut ChaCha8Rng, n: usize) -> Marginal {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    Marginal::new(Array1::from_iter(raw.into_iter().map(|w| w / total))).unwrap()
}

pub fn random_cost(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Array2<f64> {
    Array2::from_shape_fn((m, n), |_| rng.gen_range(0.0..10.0))
}

/// A random instance; with `mask = true` an infinite-cost mask is sprinkled
/// in and re-drawn until the instance stays feasible.
pub fn random_instance(rng: &mut ChaCha8Rng, m_max: usize, n_max: usize, mask: bool) -> Instance {
    let m = rng.gen_range(2..=m_max);
    let n = rng.gen_range(2..=n_max);
    let mu = random_marginal(rng, m);
    let nu = random_marginal(rng, n);
    let base = random_cost(rng, m, n);

    if mask {
        for _ in 0..40 {
            let density = rng.gen_range(0.1..0.5);
            let mut rows = base.clone();
            for v in rows.iter_mut() {
                if rng.gen_bool(density) {
                    *v = f64::INFINITY;
                }
            }
            let cost = CostMatrix::from_f64(&rows).unwrap();
            if matches!(
                finite_cost_feasible(&mu, &nu, &cost).unwrap(),
                Feasibility::Feasible
            ) {
                return Instance {
                    mu,
                    nu,
                    cost,
                    masked: true,
                };
            }
        }
    }
    let cost = CostMatrix::from_f64(&base).unwrap();
    Instance {
        mu,
        nu,
        cost,
        masked: false,
    }
}

pub fn solve_optimal(inst: &Instance) -> SolveResult {
    match solve_mk(&inst.mu, &inst.nu, &inst.cost, &SolveConfig::default()).unwrap() {
        MkSolution::Optimal(r) => *r,
        MkSolution::Infeasible(cut) => panic!("generator produced an infeasible instance: {cut:?}"),
    }
}

/// A random instance whose costs are distances between points embedded in
/// the plane, rescaled so the minimum finite cost is exactly 1. Such costs
/// satisfy the quadrilateral inequality
/// `c(i,j) ≤ c(i,j') + c(i',j') + c(i',j)`, which is the regime where
/// two-sided (strengthened) certificates exist and the marginal dual norm
/// coincides with the transport value.
pub fn random_metric_instance(
    rng: &mut ChaCha8Rng,
    m_max: usize,
    n_max: usize,
    mask: bool,
) -> Instance {
    let m = rng.gen_range(2..=m_max);
    let n = rng.gen_range(2..=n_max);
    let mu = random_marginal(rng, m);
    let nu = random_marginal(rng, n);

    'resample: loop {
        let xs: Vec<(f64, f64)> = (0..m)
            .map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)))
            .collect();
        let ys: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)))
            .collect();
        let mut base = Array2::zeros((m, n));
        for i in 0..m {
            for j in 0..n {
                let (dx, dy) = (xs[i].0 - ys[j].0, xs[i].1 - ys[j].1);
                base[[i, j]] = (dx * dx + dy * dy).sqrt();
            }
        }
        let base_min = base.iter().cloned().fold(f64::INFINITY, f64::min);
        if base_min < 0.05 {
            continue 'resample; // keep the rescale factor bounded
        }

        if mask {
            for _ in 0..40 {
                let mut rows = base.clone();
                let density = rng.gen_range(0.1..0.4);
                for v in rows.iter_mut() {
                    if rng.gen_bool(density) {
                        *v = f64::INFINITY;
                    }
                }
                let min_fin = rows
                    .iter()
                    .cloned()
                    .filter(|v| v.is_finite())
                    .fold(f64::INFINITY, f64::min);
                if !min_fin.is_finite() {
                    continue;
                }
                // dividing by the minimum pins it to exactly 1 and preserves
                // the quadrilateral inequality (positive homogeneity)
                let scaled = rows.mapv(|v| v / min_fin);
                let cost = CostMatrix::from_f64(&scaled).unwrap();
                if matches!(
                    finite_cost_feasible(&mu, &nu, &cost).unwrap(),
                    Feasibility::Feasible
                ) {
                    return Instance {
                        mu,
                        nu,
                        cost,
                        masked: true,
                    };
                }
            }
        }
        let cost = CostMatrix::from_f64(&base.mapv(|v| v / base_min)).unwrap();
        return Instance {
            mu,
            nu,
            cost,
            masked: false,
        };
    }
}

/// Shifts `delta` mass around a four-cell cycle with strictly positive
/// exchange cost, producing a strictly suboptimal plan whose support still
/// contains the violating cycle. Returns `None` when no suitable cycle
/// exists in the plan.
pub fn perturb_along_cycle(
    plan: &TransportPlan,
    cost: &CostMatrix,
    mu: &Marginal,
    nu: &Marginal,
    delta: f64,
) -> Option<TransportPlan> {
    let margin = 0.02;
    let min_gain = 0.01;
    let (m, n) = (plan.rows(), plan.cols());
    for i1 in 0..m {
        for i2 in 0..m {
            if i1 == i2 {
                continue;
            }
            for j1 in 0..n {
                for j2 in 0..n {
                    if j1 == j2 {
                        continue;
                    }
                    if plan.mass_at(i1, j1) < delta + margin
                        || plan.mass_at(i2, j2) < delta + margin
                        || !cost.is_finite_at(i1, j2)
                        || !cost.is_finite_at(i2, j1)
                        || !cost.is_finite_at(i1, j1)
                        || !cost.is_finite_at(i2, j2)
                    {
                        continue;
                    }
                    let gain = cost.at(i1, j2).value() + cost.at(i2, j1).value()
                        - cost.at(i1, j1).value()
                        - cost.at(i2, j2).value();
                    if gain < min_gain {
                        continue;
                    }
                    let mut mass = plan.mass().clone();
                    mass[[i1, j1]] -= delta;
                    mass[[i2, j2]] -= delta;
                    mass[[i1, j2]] += delta;
                    mass[[i2, j1]] += delta;
                    return Some(TransportPlan::new(mass, mu, nu, 1e-9).unwrap());
                }
            }
        }
    }
    None
}
