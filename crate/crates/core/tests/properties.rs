use adlm_core::algorithms::PenaltySchedule;
use adlm_core::instances::{self, block_catalog};
use adlm_core::linalg::{Matrix, Vector};
use adlm_core::problem::{BlockId, ConstraintSet, ObjectiveBlock, PrimalDualPoint, StructuredProblem};
use adlm_core::sampling::stream_rng;
use adlm_core::subsolvers::{project, solve_block, SolverPolicy, Strategy, SubproblemSpec};
use proptest::prelude::*;
use rand::Rng;

fn central_difference(f: impl Fn(&[f64]) -> f64, v: &[f64]) -> Vector {
    let h = 1e-6 * (1.0 + v.iter().map(|x| x * x).sum::<f64>().sqrt());
    let mut probe = v.to_vec();
    Vector::from_fn(v.len(), |k, _| {
        probe[k] = v[k] + h;
        let up = f(&probe);
        probe[k] = v[k] - h;
        let down = f(&probe);
        probe[k] = v[k];
        (up - down) / (2.0 * h)
    })
}

fn relative_error(g: &Vector, fd: &Vector) -> f64 {
    (g - fd).norm() / g.norm().max(fd.norm()).max(1e-8)
}

#[test]
fn every_builtin_gradient_matches_finite_differences() {
    let mut rng = stream_rng(2024, 7);
    for (kind, block) in block_catalog() {
        for _ in 0..100 {
            let v: Vec<f64> = (0..block.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
            let g = block.gradient(&v);
            let fd = central_difference(|p| block.value(p), &v);
            let err = relative_error(&g, &fd);
            assert!(err <= 1e-6 || (&g - &fd).norm() <= 1e-9, "{kind} at {v:?}: {err}");
        }
    }
}

fn catalog_problem(f: ObjectiveBlock, g: ObjectiveBlock, seed: u64) -> StructuredProblem {
    let mut rng = stream_rng(seed, 11);
    let q = 3;
    let a = Matrix::from_fn(q, f.dim(), |_, _| rng.random_range(-1.0..1.0));
    let b = Matrix::from_fn(q, g.dim(), |_, _| rng.random_range(-1.0..1.0));
    let c = Vector::from_fn(q, |_, _| rng.random_range(-1.0..1.0));
    let (px, pz) = (f.dim(), g.dim());
    StructuredProblem::new(
        f,
        g,
        a,
        b,
        c,
        ConstraintSet::whole_space(px).unwrap(),
        ConstraintSet::whole_space(pz).unwrap(),
    )
    .unwrap()
}

#[test]
fn augmented_lagrangian_gradient_matches_finite_differences() {
    let catalog = block_catalog();
    let mut rng = stream_rng(99, 3);
    for (k, (kind, f)) in catalog.iter().enumerate() {
        let g = catalog[(k + 3) % catalog.len()].1.clone();
        let p = catalog_problem(f.clone(), g, k as u64);
        for _ in 0..100 {
            let mut rand_vec = |n: usize| Vector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
            let pt = PrimalDualPoint::new(rand_vec(p.x_dim()), rand_vec(p.z_dim()), rand_vec(3), 1.7);
            let gx = p.augmented_lagrangian_gradient(&pt, BlockId::X).unwrap();
            let fd_x = central_difference(
                |v| {
                    let q = PrimalDualPoint::new(Vector::from_column_slice(v), pt.z.clone(), pt.y.clone(), pt.rho);
                    p.augmented_lagrangian(&q).unwrap()
                },
                pt.x.as_slice(),
            );
            assert!(relative_error(&gx, &fd_x) <= 1e-6, "{kind} x-block");
            let gz = p.augmented_lagrangian_gradient(&pt, BlockId::Z).unwrap();
            let fd_z = central_difference(
                |v| {
                    let q = PrimalDualPoint::new(pt.x.clone(), Vector::from_column_slice(v), pt.y.clone(), pt.rho);
                    p.augmented_lagrangian(&q).unwrap()
                },
                pt.z.as_slice(),
            );
            assert!(relative_error(&gz, &fd_z) <= 1e-6, "{kind} z-block");
        }
    }
}

/// Random strongly convex quadratic consensus problem and its KKT point.
fn convex_quadratic(seed: u64) -> (StructuredProblem, PrimalDualPoint) {
    let mut rng = stream_rng(seed, 21);
    let n = 2;
    let mut spd = |shift: f64| {
        let m = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &m * m.transpose() + Matrix::identity(n, n) * shift
    };
    let (qf, qg) = (spd(0.5), spd(0.5));
    let lf = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let lg = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let c = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    // min xᵀQf x + lfᵀx + zᵀQg z + lgᵀz  s.t. x - z = c
    // 2Qf x + lf + y = 0, 2Qg z + lg - y = 0, x - z = c
    let mut kkt = Matrix::zeros(3 * n, 3 * n);
    kkt.view_mut((0, 0), (n, n)).copy_from(&(&qf * 2.0));
    kkt.view_mut((n, n), (n, n)).copy_from(&(&qg * 2.0));
    for i in 0..n {
        kkt[(i, 2 * n + i)] = 1.0;
        kkt[(n + i, 2 * n + i)] = -1.0;
        kkt[(2 * n + i, i)] = 1.0;
        kkt[(2 * n + i, n + i)] = -1.0;
    }
    let mut rhs = Vector::zeros(3 * n);
    rhs.rows_mut(0, n).copy_from(&-&lf);
    rhs.rows_mut(n, n).copy_from(&-&lg);
    rhs.rows_mut(2 * n, n).copy_from(&c);
    let sol = kkt.lu().solve(&rhs).unwrap();
    let p = StructuredProblem::new(
        ObjectiveBlock::quadratic(qf, lf, 0.0).unwrap(),
        ObjectiveBlock::quadratic(qg, lg, 0.0).unwrap(),
        Matrix::identity(n, n),
        -Matrix::identity(n, n),
        c,
        ConstraintSet::whole_space(n).unwrap(),
        ConstraintSet::whole_space(n).unwrap(),
    )
    .unwrap();
    let pt = PrimalDualPoint::new(sol.rows(0, n).into_owned(), sol.rows(n, n).into_owned(), sol.rows(2 * n, n).into_owned(), 1.0);
    (p, pt)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lagrangian_equals_objective_without_multiplier_at_feasible_points(x in -3.0f64..3.0, rho in 0.1f64..100.0) {
        let p = instances::quadratic_consensus();
        let v = Vector::from_element(1, x);
        let pt = PrimalDualPoint::new(v.clone(), v.clone(), Vector::zeros(1), rho);
        prop_assert_eq!(p.augmented_lagrangian(&pt).unwrap(), p.objective(&v, &v).unwrap());
    }

    #[test]
    fn residual_is_symmetric_under_block_exchange(
        a in prop::collection::vec(-2.0f64..2.0, 4),
        x in prop::collection::vec(-2.0f64..2.0, 2),
        z in prop::collection::vec(-2.0f64..2.0, 2),
    ) {
        let m = Matrix::from_row_slice(2, 2, &a);
        let c = Vector::from_column_slice(&[0.3, -0.7]);
        let make = || StructuredProblem::new(
            ObjectiveBlock::zero(2).unwrap(), ObjectiveBlock::zero(2).unwrap(), m.clone(), m.clone(), c.clone(),
            ConstraintSet::whole_space(2).unwrap(), ConstraintSet::whole_space(2).unwrap()).unwrap();
        let p = make();
        let (xv, zv) = (Vector::from_column_slice(&x), Vector::from_column_slice(&z));
        prop_assert_eq!(p.primal_residual(&xv, &zv).unwrap(), p.primal_residual(&zv, &xv).unwrap());
    }

    #[test]
    fn certificate_passes_at_closed_form_kkt_and_fails_off_feasibility(seed in 0u64..1000, off in 1e-3f64..1.0) {
        let (p, pt) = convex_quadratic(seed);
        let cert = p.check_fon(&pt, 1e-6).unwrap();
        prop_assert!(cert.passed, "{:?}", cert);
        let shifted = PrimalDualPoint::new(&pt.x + Vector::from_element(2, off), pt.z.clone(), pt.y.clone(), 1.0);
        let bad = p.check_fon(&shifted, 1e-6).unwrap();
        prop_assert!(bad.primal_residual > 1e-6 && !bad.passed);
    }

    #[test]
    fn certificate_fields_are_consistent(seed in 0u64..1000, x in -2.0f64..2.0, z in -2.0f64..2.0, y in -3.0f64..3.0, tol in 1e-8f64..1e-1) {
        let p = instances::interval_union_counterexample();
        let _ = seed;
        let pt = PrimalDualPoint::new(Vector::from_element(1, x), Vector::from_element(1, z), Vector::from_element(1, y), 1.0);
        let c = p.check_fon(&pt, tol).unwrap();
        let parts = [c.primal_residual, c.set_violation, c.dual_feasibility_violation,
            c.complementary_slackness_violation, c.stationarity_residual_x, c.stationarity_residual_z];
        prop_assert!(parts.iter().all(|v| *v >= 0.0));
        prop_assert_eq!(c.passed, parts.iter().all(|v| *v <= tol) && !c.regularity_violated);
        prop_assert!(c.recovered_multipliers.gamma.iter().chain(c.recovered_multipliers.omega.iter()).all(|v| *v >= 0.0));
    }

    #[test]
    fn box_and_ball_projection_idempotent_and_nonexpansive(
        u in prop::collection::vec(-5.0f64..5.0, 3),
        v in prop::collection::vec(-5.0f64..5.0, 3),
        r in 0.1f64..3.0,
    ) {
        let boxed = ConstraintSet::boxed(Vector::from_column_slice(&[-1.0, 0.0, 0.5]), Vector::from_column_slice(&[1.0, 2.0, 0.5])).unwrap();
        let ball = ConstraintSet::ball(Vector::from_column_slice(&[0.5, -0.5, 1.0]), r).unwrap();
        for set in [&boxed, &ball] {
            let pu = project(set, &u).unwrap();
            let pv = project(set, &v).unwrap();
            prop_assert!(set.violation(pu.as_slice()) <= 1e-12);
            prop_assert!((project(set, pu.as_slice()).unwrap() - &pu).norm() <= 1e-14);
            let d = (Vector::from_column_slice(&u) - Vector::from_column_slice(&v)).norm();
            prop_assert!((&pu - &pv).norm() <= d + 1e-12);
        }
    }

    #[test]
    fn interval_union_projection_idempotent(v in -4.0f64..5.0) {
        let set = ConstraintSet::interval_union(vec![(-1.0, 0.0), (1.0, 2.0), (3.0, 3.5)]).unwrap();
        let pv = project(&set, &[v]).unwrap();
        prop_assert!(set.violation(pv.as_slice()) == 0.0);
        prop_assert_eq!(project(&set, pv.as_slice()).unwrap(), pv.clone());
        // nearest piece: no feasible endpoint is strictly closer
        for e in [-1.0, 0.0, 1.0, 2.0, 3.0, 3.5] {
            prop_assert!((pv[0] - v).abs() <= (e - v).abs() + 1e-15);
        }
    }

    #[test]
    fn block_solutions_are_feasible_and_never_worse_than_warm_start(
        w in -3.0f64..3.0, rho in 0.5f64..20.0, warm in -1.0f64..2.0, kind in 0usize..4,
    ) {
        let set = ConstraintSet::interval_union(vec![(-1.0, 0.0), (1.0, 2.0)]).unwrap();
        let obj = match kind {
            0 => ObjectiveBlock::square(),
            1 => ObjectiveBlock::cosine(1.0, 0.0),
            2 => ObjectiveBlock::negative_square(),
            _ => ObjectiveBlock::polynomial(vec![0.0, 1.0, -0.5, 0.2]).unwrap(),
        };
        let warm_v = project(&set, &[warm]).unwrap();
        let spec = SubproblemSpec::new(&obj, Vector::from_element(1, w), Matrix::from_element(1, 1, rho), &set, warm_v.clone()).unwrap();
        let warm_value = spec.value(warm_v.as_slice());
        for strategy in [Strategy::Auto, Strategy::ProjectedGradient, Strategy::GridGlobal, Strategy::ScalarExact] {
            let sol = solve_block(&spec, &SolverPolicy::new(strategy)).unwrap();
            prop_assert!(set.violation(sol.minimizer.as_slice()) <= 1e-12, "{:?}", strategy);
            prop_assert!(sol.value <= warm_value + 1e-13 * (1.0 + warm_value.abs()), "{:?}", strategy);
        }
        let exact = solve_block(&spec, &SolverPolicy::new(Strategy::ScalarExact)).unwrap();
        let grid = solve_block(&spec, &SolverPolicy::new(Strategy::GridGlobal)).unwrap();
        prop_assert!((exact.value - grid.value).abs() <= 1e-8 * (1.0 + exact.value.abs()));
    }

    #[test]
    fn geometric_schedule_grows_by_factor_every_period(rho0 in 0.1f64..10.0, delta in 1.01f64..3.0, kappa in 1usize..10, t in 0usize..200) {
        let s = PenaltySchedule::geometric(rho0, delta, kappa).unwrap();
        prop_assert!(s.rho(t + kappa) >= delta * s.rho(t) * (1.0 - 1e-15));
        prop_assert!(s.rho(t + 1) >= s.rho(t));
    }
}
