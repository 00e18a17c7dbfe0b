//! Property suites for the spec-level invariants that are not already part
//! of the acceptance criteria. Seeded randomness throughout.

mod common;

use ndarray::Array2;
use rand::Rng;

use otkit::analysis::{dual_cost_norm, marginal_dual_norm};
use otkit::certificates::{
    cyclical_monotonicity_check, strong_monotonicity_check, verify_certificate,
    verify_strengthened_certificate, Monotonicity, SupportSet,
};
use otkit::duality::{dual_value, extract_potentials, strengthen_potentials};
use otkit::solver::{finite_cost_feasible, solve_mk, Feasibility, MkSolution, SolveConfig};
use otkit::{plan_cost, CostMatrix, Marginal, PotentialPair, TransportPlan};

#[test]
fn plan_cost_is_affine_in_the_plan() {
    let mut rng = common::rng(11);
    for _ in 0..50 {
        let inst = common::random_instance(&mut rng, 6, 6, false);
        let p = common::solve_optimal(&inst).plan;
        // a second feasible plan for the same marginals, from scrambled costs
        let other_cost =
            CostMatrix::from_f64(&common::random_cost(&mut rng, inst.mu.len(), inst.nu.len()))
                .unwrap();
        let alt = common::solve_optimal(&common::Instance {
            mu: inst.mu.clone(),
            nu: inst.nu.clone(),
            cost: other_cost,
            masked: false,
        })
        .plan;

        let lambda = rng.gen_range(0.0..1.0);
        let mix = TransportPlan::new(
            p.mass() * lambda + alt.mass() * (1.0 - lambda),
            &inst.mu,
            &inst.nu,
            1e-9,
        )
        .unwrap();
        let lhs = plan_cost(&mix, &inst.cost).unwrap().value();
        let rhs = lambda * plan_cost(&p, &inst.cost).unwrap().value()
            + (1.0 - lambda) * plan_cost(&alt, &inst.cost).unwrap().value();
        assert!(
            (lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()),
            "{lhs} vs {rhs}"
        );
    }
}

#[test]
fn normalization_shifts_plan_cost_by_the_shift() {
    let mut rng = common::rng(12);
    for k in 0..50 {
        let inst = common::random_instance(&mut rng, 6, 6, k % 3 == 0);
        let plan = common::solve_optimal(&inst).plan;
        let (c_norm, shift) = inst.cost.normalize().unwrap();
        let before = plan_cost(&plan, &inst.cost).unwrap().value();
        let after = plan_cost(&plan, &c_norm).unwrap().value();
        assert!(
            (after - before - shift).abs() <= 1e-12 * (1.0 + after.abs()),
            "{after} != {before} + {shift}"
        );
    }
}

#[test]
fn solving_normalized_costs_gives_identical_plans() {
    let mut rng = common::rng(13);
    let cfg = SolveConfig::default();
    for k in 0..30 {
        let inst = common::random_instance(&mut rng, 6, 6, k % 3 == 0);
        let (c_norm, shift) = inst.cost.normalize().unwrap();
        let a = common::solve_optimal(&inst);
        let b = match solve_mk(&inst.mu, &inst.nu, &c_norm, &cfg).unwrap() {
            MkSolution::Optimal(r) => *r,
            MkSolution::Infeasible(_) => panic!("normalization changed feasibility"),
        };
        for (x, y) in a.plan.mass().iter().zip(b.plan.mass().iter()) {
            assert_eq!(x.to_bits(), y.to_bits(), "plans diverged");
        }
        let (va, vb) = (a.value.value(), b.value.value());
        assert!(
            (vb - va - shift).abs() <= 1e-12 * (1.0 + vb.abs()),
            "values {va} and {vb} are not {shift} apart"
        );
    }
}

#[test]
fn feasibility_verdicts_are_consistent_with_the_solver() {
    let mut rng = common::rng(14);
    let cfg = SolveConfig::default();
    let mut infeasible_seen = 0;
    for _ in 0..150 {
        // raw masks, infeasible ones very much included
        let m = rng.gen_range(2..=6);
        let n = rng.gen_range(2..=6);
        let mu = common::random_marginal(&mut rng, m);
        let nu = common::random_marginal(&mut rng, n);
        let mut rows = common::random_cost(&mut rng, m, n);
        let density = rng.gen_range(0.3..0.8);
        for v in rows.iter_mut() {
            if rng.gen_bool(density) {
                *v = f64::INFINITY;
            }
        }
        let c = CostMatrix::from_f64(&rows).unwrap();

        let feas = finite_cost_feasible(&mu, &nu, &c).unwrap();
        let solved = solve_mk(&mu, &nu, &c, &cfg).unwrap();
        match (&feas, &solved) {
            (Feasibility::Feasible, MkSolution::Optimal(r)) => {
                assert!(r.plan.max_residual() <= cfg.tolerance);
                for ((i, j), &mass) in r.plan.mass().indexed_iter() {
                    assert!(mass >= 0.0);
                    if !c.is_finite_at(i, j) {
                        assert_eq!(mass, 0.0, "mass on an infinite cell at ({i},{j})");
                    }
                }
            }
            (Feasibility::Infeasible(cut), MkSolution::Infeasible(cut2)) => {
                infeasible_seen += 1;
                // the witness verifies by direct arithmetic
                let mu_mass: f64 = cut.a_subset.iter().map(|&i| mu.weight(i)).sum();
                let nu_mass: f64 = cut.b_neighbors.iter().map(|&j| nu.weight(j)).sum();
                assert!(
                    mu_mass > nu_mass,
                    "cut does not certify: {mu_mass} <= {nu_mass}"
                );
                for &i in &cut.a_subset {
                    for j in 0..n {
                        if c.is_finite_at(i, j) {
                            assert!(
                                cut.b_neighbors.contains(&j),
                                "neighbor {j} of row {i} missing from the cut"
                            );
                        }
                    }
                }
                assert_eq!(cut.a_subset, cut2.a_subset);
            }
            _ => panic!("solver and feasibility check disagree"),
        }
    }
    assert!(
        infeasible_seen >= 20,
        "only {infeasible_seen} infeasible draws"
    );
}

#[test]
fn weak_duality_holds_for_feasible_pairs() {
    let mut rng = common::rng(15);
    let cfg = SolveConfig::default();
    for _ in 0..60 {
        let inst = common::random_instance(&mut rng, 6, 6, false);
        let solved = common::solve_optimal(&inst);
        let potentials = extract_potentials(&solved.plan, &inst.cost, &cfg).unwrap();

        // any feasible plan (optimal for scrambled costs) stays above the dual
        let other =
            CostMatrix::from_f64(&common::random_cost(&mut rng, inst.mu.len(), inst.nu.len()))
                .unwrap();
        let any_plan = common::solve_optimal(&common::Instance {
            mu: inst.mu.clone(),
            nu: inst.nu.clone(),
            cost: other,
            masked: false,
        })
        .plan;
        let primal = plan_cost(&any_plan, &inst.cost).unwrap().value();
        let dual = dual_value(&inst.mu, &inst.nu, &potentials).unwrap();
        let scale = 1.0 + inst.cost.max_finite().unwrap_or(0.0);
        assert!(
            dual <= primal + 1e-9 * scale,
            "weak duality broken: {dual} > {primal}"
        );
    }
}

#[test]
fn strengthening_preserves_the_dual_value() {
    let mut rng = common::rng(16);
    let cfg = SolveConfig::default();
    for _ in 0..50 {
        let inst = common::random_metric_instance(&mut rng, 8, 8, false);
        let solved = common::solve_optimal(&inst);
        let seed = extract_potentials(&solved.plan, &inst.cost, &cfg).unwrap();
        let strong = strengthen_potentials(&solved.plan, &inst.cost, &seed).unwrap();
        let a = dual_value(&inst.mu, &inst.nu, &seed).unwrap();
        let b = dual_value(&inst.mu, &inst.nu, &strong).unwrap();
        let scale = 1.0 + inst.cost.max_finite().unwrap_or(0.0);
        assert!(
            (a - b).abs() <= 1e-9 * scale,
            "dual value drifted: {a} vs {b}"
        );
    }
}

#[test]
fn dual_value_is_gauge_invariant() {
    let mut rng = common::rng(17);
    for _ in 0..50 {
        let inst = common::random_instance(&mut rng, 6, 6, false);
        let solved = common::solve_optimal(&inst);
        let p = solved.potentials;
        let base = dual_value(&inst.mu, &inst.nu, &p).unwrap();
        for t in [0.5, -3.0, 128.0] {
            let shifted =
                PotentialPair::new(p.phi().mapv(|x| x + t), p.psi().mapv(|x| x - t)).unwrap();
            let v = dual_value(&inst.mu, &inst.nu, &shifted).unwrap();
            assert!((v - base).abs() <= 1e-12 * (1.0 + base.abs()) + 1e-12 * t.abs());
        }
    }
}

/// Exhaustive oracle: enumerate every simple cycle over the support pairs
/// (up to rotation) and compare its assigned-versus-swapped totals.
fn exhaustive_cyclically_monotone(pairs: &[(usize, usize)], c: &CostMatrix) -> bool {
    let k = pairs.len();
    let idx: Vec<usize> = (0..k).collect();
    // families are rotations of permutations of subsets; fixing the smallest
    // element first removes the rotational symmetry
    fn visit(
        pairs: &[(usize, usize)],
        c: &CostMatrix,
        chosen: &mut Vec<usize>,
        rest: &[usize],
        min_len: usize,
    ) -> bool {
        if chosen.len() >= min_len {
            let n = chosen.len();
            let mut assigned = 0.0;
            let mut swapped = 0.0;
            let mut valid = true;
            for t in 0..n {
                let (ai, bi) = pairs[chosen[t]];
                let (_, bn) = pairs[chosen[(t + 1) % n]];
                if !c.is_finite_at(ai, bn) {
                    valid = false;
                    break;
                }
                assigned += c.at(ai, bi).value();
                swapped += c.at(ai, bn).value();
            }
            if valid && assigned > swapped + 1e-7 {
                return false; // found a violating family
            }
        }
        for (pos, &cand) in rest.iter().enumerate() {
            // keep chosen[0] the minimum of the family: kill rotations
            if !chosen.is_empty() && cand < chosen[0] {
                continue;
            }
            let mut next_rest = rest.to_vec();
            next_rest.remove(pos);
            chosen.push(cand);
            let ok = visit(pairs, c, chosen, &next_rest, min_len);
            chosen.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    visit(pairs, c, &mut Vec::new(), &idx, 2)
}

#[test]
fn cyclical_check_matches_exhaustive_enumeration() {
    let mut rng = common::rng(18);
    let mut violating_seen = 0;
    for trial in 0..300 {
        let m = rng.gen_range(2..=4);
        let n = rng.gen_range(2..=4);
        let rows = common::random_cost(&mut rng, m, n);
        let c = CostMatrix::from_f64(&rows).unwrap();
        // a random distinct support of size <= 6
        let mut cells: Vec<(usize, usize)> =
            (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
        for i in (1..cells.len()).rev() {
            let j = rng.gen_range(0..=i);
            cells.swap(i, j);
        }
        let size = rng.gen_range(1..=cells.len().min(6));
        cells.truncate(size);
        cells.sort_unstable();

        let support = SupportSet::new(cells.clone(), m, n).unwrap();
        let fast = matches!(
            cyclical_monotonicity_check(&support, &c, 1e-9).unwrap(),
            Monotonicity::Monotone
        );
        let slow = exhaustive_cyclically_monotone(&cells, &c);
        assert_eq!(
            fast, slow,
            "trial {trial}: checker {fast} vs oracle {slow} on {cells:?}"
        );
        if !slow {
            violating_seen += 1;
        }
    }
    assert!(
        violating_seen >= 50,
        "only {violating_seen} violating supports drawn"
    );
}

#[test]
fn monotonicity_implications_hold_with_infinite_costs() {
    let mut rng = common::rng(19);
    for _ in 0..60 {
        let inst = common::random_instance(&mut rng, 6, 6, true);
        let solved = common::solve_optimal(&inst);

        // optimal ⇒ cyclically monotone
        let support = SupportSet::from_plan(&solved.plan, 1e-10);
        assert!(matches!(
            cyclical_monotonicity_check(&support, &inst.cost, 1e-9).unwrap(),
            Monotonicity::Monotone
        ));

        // strongly monotone ⇒ optimal, exercised on perturbed plans too
        for plan in [Some(solved.plan.clone()), {
            common::perturb_along_cycle(&solved.plan, &inst.cost, &inst.mu, &inst.nu, 0.05)
        }]
        .into_iter()
        .flatten()
        {
            if strong_monotonicity_check(&plan, &inst.cost, 1e-9)
                .unwrap()
                .is_strongly_monotone()
            {
                let v = plan_cost(&plan, &inst.cost).unwrap().value();
                let opt = solved.value.value();
                assert!(
                    v <= opt + 1e-9 * (1.0 + opt.abs()),
                    "strongly monotone plan costs {v} above the optimum {opt}"
                );
            }
        }
    }
}

#[test]
fn strengthened_pass_implies_basic_pass() {
    let mut rng = common::rng(20);
    let cfg = SolveConfig::default();
    for _ in 0..50 {
        let inst = common::random_metric_instance(&mut rng, 7, 7, false);
        let solved = common::solve_optimal(&inst);
        let seed = extract_potentials(&solved.plan, &inst.cost, &cfg).unwrap();
        let strong = strengthen_potentials(&solved.plan, &inst.cost, &seed).unwrap();
        let strengthened =
            verify_strengthened_certificate(&solved.plan, &inst.cost, &strong, 1e-9, 1e-10)
                .unwrap()
                .passed();
        let basic = verify_certificate(&solved.plan, &inst.cost, &strong, 1e-9, 1e-10)
            .unwrap()
            .passed();
        assert!(strengthened, "strengthened certificate should pass here");
        assert!(basic, "strengthened pass must imply the basic pass");
    }
}

#[test]
fn marginal_dual_norm_lower_bounds_every_representation() {
    let mut rng = common::rng(21);
    for k in 0..80 {
        let inst = common::random_instance(&mut rng, 6, 6, k % 3 == 0);
        let c = &inst.cost;
        let (m, n) = (c.rows(), c.cols());
        let mut ell = Array2::zeros((m, n));
        for (i, j) in c.finite_cells() {
            ell[[i, j]] = rng.gen_range(-1.0..1.0);
        }
        let k1 = ell.sum_axis(ndarray::Axis(1));
        let k2 = ell.sum_axis(ndarray::Axis(0));
        let norm = marginal_dual_norm(&k1, &k2, c).unwrap();
        let rep = dual_cost_norm(&ell, c).unwrap();
        let scale = 1.0 + c.max_finite().unwrap_or(0.0);
        assert!(
            norm.value() <= rep.value() + 1e-9 * scale,
            "infimum {norm} above the representation {rep}"
        );
    }
}

#[test]
fn marginal_dual_norm_never_exceeds_the_transport_value() {
    let mut rng = common::rng(22);
    for k in 0..60 {
        // uniform costs: signed routings may be strictly cheaper, but never
        // more expensive than the optimal coupling
        let inst = common::random_instance(&mut rng, 6, 6, k % 3 == 0);
        let solved = common::solve_optimal(&inst);
        let mdn = marginal_dual_norm(inst.mu.weights(), inst.nu.weights(), &inst.cost).unwrap();
        let v = solved.value.value();
        assert!(
            mdn.value() <= v + 1e-7 * (1.0 + v),
            "marginal dual norm {mdn} above the transport value {v}"
        );
    }
}

#[test]
fn optimal_plan_without_two_sided_potentials_is_reported_honestly() {
    // A cheap bridge (c01 > c00 + c10 + c11) plus marginal pressure forces
    // the support through the expensive cell; the tight system then pins
    // phi_1 + psi_0 = -8 against the bound |…| <= 1, so no two-sided pair
    // exists even though the plan is optimal. The one-sided certificate
    // must still work.
    let mu = Marginal::from_slice(&[0.9, 0.1]).unwrap();
    let nu = Marginal::from_slice(&[0.1, 0.9]).unwrap();
    let c = CostMatrix::from_rows(&[vec![1.0, 10.0], vec![1.0, 1.0]]).unwrap();
    let cfg = SolveConfig::default();
    let solved = match solve_mk(&mu, &nu, &c, &cfg).unwrap() {
        MkSolution::Optimal(r) => *r,
        MkSolution::Infeasible(_) => unreachable!(),
    };
    assert!((solved.value.value() - 8.2).abs() < 1e-9);

    let one_sided = extract_potentials(&solved.plan, &c, &cfg).unwrap();
    assert!(
        verify_certificate(&solved.plan, &c, &one_sided, 1e-9, 1e-10)
            .unwrap()
            .passed()
    );

    let err = strengthen_potentials(&solved.plan, &c, &one_sided).unwrap_err();
    assert!(matches!(err, otkit::Error::PlanNotOptimal(_)));
}

#[test]
fn extraction_success_certifies_a_small_gap() {
    let mut rng = common::rng(23);
    let cfg = SolveConfig::default();
    for k in 0..60 {
        let inst = common::random_instance(&mut rng, 8, 8, k % 4 == 0);
        let solved = common::solve_optimal(&inst);
        let p = extract_potentials(&solved.plan, &inst.cost, &cfg).unwrap();
        let report =
            otkit::duality::duality_gap(&inst.mu, &inst.nu, &inst.cost, &solved.plan, &p, &cfg)
                .unwrap();
        let v = report.primal_value.value();
        assert!(
            report.gap.abs() <= cfg.tolerance * (1.0 + v.abs()),
            "gap {} too large for value {v}",
            report.gap
        );
        assert!(report.feasible_everywhere);
        assert!(report.tight_on_support);
    }
}

#[test]
fn cheap_bridges_can_beat_the_coupling_value() {
    // With c01 > c00 + c10 + c11, a signed routing that cancels mass through
    // the cheap cells undercuts every nonnegative coupling; the marginal
    // dual norm is a true infimum over signed representations, so it drops
    // strictly below the transport value here.
    let mu = Marginal::from_slice(&[0.9, 0.1]).unwrap();
    let nu = Marginal::from_slice(&[0.1, 0.9]).unwrap();
    let c = CostMatrix::from_rows(&[vec![1.0, 10.0], vec![1.0, 1.0]]).unwrap();
    let solved = match solve_mk(&mu, &nu, &c, &SolveConfig::default()).unwrap() {
        MkSolution::Optimal(r) => *r,
        MkSolution::Infeasible(_) => unreachable!(),
    };
    assert!((solved.value.value() - 8.2).abs() < 1e-9);
    let mdn = marginal_dual_norm(mu.weights(), nu.weights(), &c).unwrap();
    assert!((mdn.value() - 2.6).abs() < 1e-9, "expected 2.6, got {mdn}");
    assert!(mdn.value() < solved.value.value());
}
