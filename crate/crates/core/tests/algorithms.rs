use adlm_core::algorithms::*;
use adlm_core::instances;
use adlm_core::linalg::Vector;
use adlm_core::problem::{BlockId, ObjectiveBlock, PrimalDualPoint, StructuredProblem};
use adlm_core::subsolvers::{SolverPolicy, Strategy};

fn s(v: f64) -> Vector {
    Vector::from_element(1, v)
}

fn lagrangian(p: &StructuredProblem, x: &Vector, z: &Vector, y: &Vector, rho: f64) -> f64 {
    p.augmented_lagrangian(&PrimalDualPoint::new(x.clone(), z.clone(), y.clone(), rho))
        .unwrap()
}

/// z-update never increases the augmented Lagrangian; multiplier steps follow the residual.
fn check_step_invariants(p: &StructuredProblem, trace: &IterationTrace, recursion: bool) {
    for w in trace.records.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        let before = lagrangian(p, &cur.x, &prev.z, &prev.y, cur.rho);
        let after = lagrangian(p, &cur.x, &cur.z, &prev.y, cur.rho);
        assert!(after <= before + 1e-12 * (1.0 + before.abs()), "t={}: {after} > {before}", cur.t);
        if recursion {
            let r = p.coupling_residual(&cur.x, &cur.z).unwrap();
            let expected = &prev.y + r * cur.rho;
            assert!((&cur.y - expected).norm() <= 1e-12 * (1.0 + cur.y.norm()));
        }
    }
}

#[test]
fn admm_reaches_consensus_kkt_point() {
    let p = instances::quadratic_consensus();
    let stop = StopRule { step_tol: 1e-12, primal_tol: 1e-12, ..StopRule::default() };
    let trace = run_admm(&p, 2.0, &InitialPoint::new(s(0.0), s(0.0)), &SolverPolicy::default(), &stop).unwrap();
    assert_eq!(trace.verdict, Verdict::Converged);
    let last = trace.last();
    assert!((last.x[0] - 1.5).abs() < 1e-8);
    assert!((last.z[0] - 1.5).abs() < 1e-8);
    assert!((last.y[0] + 1.0).abs() < 1e-8);
    assert!(trace.fon.as_ref().unwrap().passed);
    assert_eq!(trace.records.len(), trace.iterations() + 1);
    check_step_invariants(&p, &trace, true);

    let diag = diagnose_trace(&trace, &p, 1e-6).unwrap();
    assert!(diag.dual_converged);
    assert!(diag.fon.unwrap().passed);
    assert!(diag.residual_bound.is_none());
}

#[test]
fn method_of_multipliers_matches_admm() {
    let p = instances::quadratic_consensus();
    let stop = StopRule { step_tol: 1e-12, primal_tol: 1e-12, ..StopRule::default() };
    let init = InitialPoint::new(s(0.0), s(0.0));
    let trace = run_method_of_multipliers(&p, 2.0, &init, &SolverPolicy::default(), &stop).unwrap();
    assert_eq!(trace.verdict, Verdict::Converged);
    assert!((trace.last().x[0] - 1.5).abs() < 1e-8);
    assert!((trace.last().y[0] + 1.0).abs() < 1e-8);

    // started at the KKT point, the first iteration already satisfies the stop rule
    let at_opt = InitialPoint::new(s(1.5), s(-1.0)).with_x0(s(1.5));
    let trace = run_method_of_multipliers(&p, 2.0, &at_opt, &SolverPolicy::default(), &stop).unwrap();
    assert_eq!(trace.iterations(), 1);
    assert_eq!(trace.verdict, Verdict::Converged);
}

#[test]
fn method_of_multipliers_on_cos_sin_is_stationary() {
    let p = instances::scalar_consensus(ObjectiveBlock::cosine(1.0, 0.0), ObjectiveBlock::sine());
    let stop = StopRule { max_iters: 2000, step_tol: 1e-10, primal_tol: 1e-10, ..StopRule::default() };
    let init = InitialPoint::new(s(2.0), s(2.0f64.cos()));
    let trace = run_method_of_multipliers(&p, 2.0, &init, &SolverPolicy::default(), &stop).unwrap();
    assert_eq!(trace.verdict, Verdict::Converged);
    let z = trace.last().z[0];
    assert!((-z.sin() + z.cos()).abs() < 1e-8);
}

#[test]
fn adpm_rejects_constant_schedule_and_unbounded_recursion() {
    let p = instances::quadratic_consensus();
    let init = InitialPoint::new(s(0.0), s(0.0));
    let pol = SolverPolicy::default();
    let stop = StopRule::default();
    assert!(run_adpm(&p, &PenaltySchedule::constant(1.0).unwrap(), DualPolicy::Zero, &init, &pol, &stop).is_err());
    let lin = PenaltySchedule::linear(1.0, 1.0).unwrap();
    assert!(run_adpm(&p, &lin, DualPolicy::MultiplierRecursion, &init, &pol, &stop).is_err());
}

#[test]
fn quadratic_penalty_reaches_closed_form_optimum() {
    let p = instances::quadratic_consensus();
    let sched = PenaltySchedule::geometric(1.0, 2.0, 1).unwrap();
    let init = InitialPoint::new(s(0.0), s(0.0));
    let stop = StopRule { max_iters: 200, primal_tol: 1e-9, step_tol: 1e-9, ..StopRule::default() };
    let q = run_quadratic_penalty(&p, &sched, &init, &SolverPolicy::default(), &stop).unwrap();
    assert_eq!(q.verdict, Verdict::Converged);
    assert!((q.last().x[0] - 1.5).abs() < 1e-6);
    assert!((q.last().z[0] - 1.5).abs() < 1e-6);
    let diag = diagnose_trace(&q, &p, 1e-6).unwrap();
    assert!(diag.dual_converged && diag.fon_recovered_dual);
    assert!(diag.fon.unwrap().stationarity_residual_x < 1e-6);
}

#[test]
fn adpm_approaches_the_penalty_limit_under_linear_growth() {
    // With ρ(t) = t + 1 the alternating iterates approach the optimum at rate O(1/ρ).
    let p = instances::quadratic_consensus();
    let sched = PenaltySchedule::linear(1.0, 1.0).unwrap();
    let init = InitialPoint::new(s(0.0), s(0.0));
    let stop = StopRule { max_iters: 20_000, primal_tol: 1e-15, step_tol: 1e-15, ..StopRule::default() };
    let a = run_adpm(&p, &sched, DualPolicy::Zero, &init, &SolverPolicy::default(), &stop).unwrap();
    check_step_invariants(&p, &a, false);
    let err = |t: usize| (0.5 * (a.records[t].x[0] + a.records[t].z[0]) - 1.5).abs();
    assert!(err(20_000) < 1e-4);
    assert!(err(20_000) < err(2_000) / 5.0);
}

#[test]
fn adpm_with_summable_growth_stalls_at_a_feasible_suboptimal_point() {
    // Σ 1/ρ(t) < ∞ bounds the total alternating movement: the limit is feasible but not optimal.
    let p = instances::quadratic_consensus();
    let sched = PenaltySchedule::geometric(1.0, 1.5, 20).unwrap();
    let init = InitialPoint::new(s(0.0), s(0.0));
    let stop = StopRule { max_iters: 3000, primal_tol: 1e-8, step_tol: 1e-8, ..StopRule::default() };
    let a = run_adpm(&p, &sched, DualPolicy::Zero, &init, &SolverPolicy::default(), &stop).unwrap();
    assert_eq!(a.verdict, Verdict::Converged);
    assert!(a.last().primal_residual <= 1e-8);
    // closed-form recurrence x ← (2 + ρz)/(2 + ρ), z ← (4 + ρx)/(2 + ρ)
    let (mut x, mut z) = (0.0f64, 0.0f64);
    for t in 0..a.records.len() - 1 {
        let r = sched.rho(t);
        x = (2.0 + r * z) / (2.0 + r);
        z = (4.0 + r * x) / (2.0 + r);
    }
    assert!((a.last().x[0] - x).abs() < 1e-6 && (a.last().z[0] - z).abs() < 1e-6);
    assert!((x - 1.5).abs() > 1e-3);
}

#[test]
fn adpm_residual_bound_on_huber_consensus() {
    let p = instances::huber_consensus(4, 2, 0.02);
    let sched = PenaltySchedule::linear(1.0, 1.0).unwrap();
    let init = InitialPoint::new(Vector::zeros(2), Vector::zeros(8));
    let stop = StopRule { max_iters: 2000, primal_tol: 1e-12, step_tol: 1e-14, ..StopRule::default() };
    let pol = SolverPolicy::new(Strategy::Auto).with_tol(1e-12);
    let trace = run_adpm(&p, &sched, DualPolicy::Zero, &init, &pol, &stop).unwrap();
    assert_eq!(trace.regime, GuaranteeRegime::UnconstrainedPenalty);
    let diag = diagnose_trace(&trace, &p, 1e-6).unwrap();
    let bound = diag.residual_bound.unwrap();
    assert_eq!(bound.satisfied, bound.checked, "{bound:?}");
    assert!((bound.projector_norm - 1.0).abs() < 1e-12);
    assert!(trace.records[2000.min(trace.iterations())].primal_residual <= 1e-4);
    check_step_invariants(&p, &trace, false);
}

#[test]
fn adpm_becomes_feasible_on_box_constrained_indefinite_instance() {
    let p = instances::box_constrained_indefinite();
    let sched = PenaltySchedule::geometric(1.0, 1.5, 5).unwrap();
    let init = InitialPoint::new(Vector::zeros(2), Vector::zeros(2));
    let stop = StopRule { max_iters: 2000, primal_tol: 1e-6, step_tol: 1e-8, ..StopRule::default() };
    let pol = SolverPolicy::new(Strategy::ProjectedGradient).with_tol(1e-12);
    let trace = run_adpm(&p, &sched, DualPolicy::BoundedRecursion { radius: 1.0 }, &init, &pol, &stop).unwrap();
    assert_eq!(trace.regime, GuaranteeRegime::ConstrainedGeometric);
    assert_eq!(trace.verdict, Verdict::Converged, "r = {}", trace.last().primal_residual);
    assert!(trace.last().primal_residual <= 1e-4);
    assert!(trace.records.iter().all(|r| r.y.norm() <= 1.0 + 1e-12));
    println!("box instance: t={} x={:?} z={:?}", trace.iterations(), trace.last().x.as_slice(), trace.last().z.as_slice());
}

#[test]
fn counterexample_adpm_limit_matches_grid_oracle() {
    let p = instances::interval_union_counterexample();
    let sched = PenaltySchedule::geometric(1.0, 1.5, 5).unwrap();
    let init = InitialPoint::new(s(0.0), s(0.0));
    let stop = StopRule { max_iters: 2000, primal_tol: 1e-8, step_tol: 1e-10, ..StopRule::default() };
    let exact = run_adpm(&p, &sched, DualPolicy::Zero, &init, &SolverPolicy::new(Strategy::ScalarExact), &stop).unwrap();
    let grid = run_adpm(&p, &sched, DualPolicy::Zero, &init, &SolverPolicy::new(Strategy::GridGlobal), &stop).unwrap();
    assert_eq!(exact.verdict, Verdict::Converged);
    let (xe, ze) = (exact.last().x[0], exact.last().z[0]);
    let (xg, zg) = (grid.last().x[0], grid.last().z[0]);
    println!(
        "counterexample: t={} x={xe:.17e} z={ze:.17e} r={:.3e}; grid x={xg:.17e} z={zg:.17e}",
        exact.iterations(),
        exact.last().primal_residual
    );
    assert!((xe - xg).abs() < 1e-6 && (ze - zg).abs() < 1e-6);
    assert!(p.augmented_lagrangian_gradient(
        &PrimalDualPoint::new(s(xe), s(ze), s(0.0), 1.0), BlockId::X).is_ok());
}

#[test]
fn quadratic_penalty_with_joint_grid_reaches_global_optimum() {
    let p = instances::interval_union_counterexample();
    let sched = PenaltySchedule::geometric(1.0, 2.0, 1).unwrap();
    let init = InitialPoint::new(s(0.0), s(0.0));
    let stop = StopRule { max_iters: 80, primal_tol: 1e-7, step_tol: 1e-7, ..StopRule::default() };
    let pol = SolverPolicy::new(Strategy::Auto).with_grid_points(201);
    let trace = run_quadratic_penalty(&p, &sched, &init, &pol, &stop).unwrap();
    let last = trace.last();
    println!("qpm: t={} x={} z={} verdict={:?}", trace.iterations(), last.x[0], last.z[0], trace.verdict);
    assert!((last.x[0] + 0.04).abs() < 1e-5);
    assert!((last.z[0] - 0.02).abs() < 1e-5);
}

#[test]
fn diverged_trace_has_no_certificate() {
    let p = instances::scalar_consensus(ObjectiveBlock::negative_square(), ObjectiveBlock::negative_square());
    let init = InitialPoint::new(s(0.1), s(-0.2));
    let trace = run_admm(&p, 3.0, &init, &SolverPolicy::new(Strategy::ScalarExact), &StopRule::default()).unwrap();
    assert_eq!(trace.verdict, Verdict::Diverged);
    assert!(trace.last().z[0] > 0.0);
    let diag = diagnose_trace(&trace, &p, 1e-6).unwrap();
    assert!(!diag.dual_converged && diag.fon.is_none());
}
