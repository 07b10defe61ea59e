use alloc::vec::Vec;

use super::schedule::PenaltySchedule;
use super::trace::{DualPolicy, GuaranteeRegime, InitialPoint, IterationRecord, IterationTrace, Method, StopRule, Verdict};
use crate::error::{check_dim, invalid, Result};
use crate::instances::stacked_objective;
use crate::linalg::{has_full_column_rank, is_identity, Matrix, Vector};
use crate::problem::{ConstraintSet, PrimalDualPoint, Profile, SamplingBox, StructuredProblem};
use crate::subsolvers::{solve_block, SolveStatus, SolverPolicy, Strategy, SubproblemSpec};

/// Maximum sweeps of the alternating inner loop of the joint baselines.
const JOINT_SWEEPS: usize = 100;

#[derive(Debug, Clone, Copy)]
enum DualRule {
    Zero,
    Fixed,
    Recursion,
    Bounded(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum StopKind {
    /// Primal residual and primal step.
    Primal,
    /// Primal residual and multiplier step.
    Dual,
}

struct Step {
    x: Vector,
    z: Vector,
    x_status: SolveStatus,
    z_status: SolveStatus,
}

/// Whether the problem has the unconstrained consensus structure
/// (`g ≡ 0`, `A = I`, `c = 0`, `B` full column rank, whole-space sets).
pub(crate) fn has_unconstrained_structure(p: &StructuredProblem) -> bool {
    p.g().is_zero()
        && is_identity(p.a())
        && p.c().iter().all(|v| *v == 0.0)
        && p.x_set().is_whole_space()
        && p.z_set().is_whole_space()
        && has_full_column_rank(p.b())
}

fn adpm_regime(p: &StructuredProblem, schedule: &PenaltySchedule, dual: DualPolicy) -> GuaranteeRegime {
    if dual == DualPolicy::Zero && schedule.is_non_summable() && has_unconstrained_structure(p) {
        return GuaranteeRegime::UnconstrainedPenalty;
    }
    if !schedule.is_non_summable() {
        let sb = SamplingBox { samples: 1000, ..SamplingBox::default() };
        if p.validate_assumptions(Profile::Prop2Constrained, &sb).passed() {
            return GuaranteeRegime::ConstrainedGeometric;
        }
    }
    GuaranteeRegime::None
}

fn projected_gradient_norm(set: &ConstraintSet, v: &Vector, grad: &Vector) -> f64 {
    if set.is_projectable() {
        match set.project((v - grad).as_slice()) {
            Ok(p) => (v - p).norm(),
            Err(_) => grad.norm(),
        }
    } else {
        grad.norm()
    }
}

fn stationarity(p: &StructuredProblem, x: &Vector, z: &Vector, y: &Vector) -> f64 {
    let gx = p.f().gradient(x.as_slice()) + p.a().tr_mul(y);
    let gz = p.g().gradient(z.as_slice()) + p.b().tr_mul(y);
    let sx = projected_gradient_norm(p.x_set(), x, &gx);
    let sz = projected_gradient_norm(p.z_set(), z, &gz);
    libm::sqrt(sx * sx + sz * sz)
}

fn record(
    p: &StructuredProblem,
    t: usize,
    rho: f64,
    (x, z, y): (&Vector, &Vector, &Vector),
    steps: (f64, f64),
    statuses: (Option<SolveStatus>, Option<SolveStatus>),
) -> IterationRecord {
    IterationRecord {
        t,
        rho,
        x: x.clone(),
        z: z.clone(),
        y: y.clone(),
        primal_residual: p.residual_unchecked(x, z).norm(),
        stationarity_norm: stationarity(p, x, z, y),
        objective: p.f().value(x.as_slice()) + p.g().value(z.as_slice()),
        dual_step_norm: steps.1,
        primal_step_norm: steps.0,
        x_status: statuses.0,
        z_status: statuses.1,
    }
}

fn start(p: &StructuredProblem, init: &InitialPoint, dual: DualRule) -> Result<(Vector, Vector, Vector)> {
    let x = init.x0.clone().unwrap_or_else(|| Vector::zeros(p.x_dim()));
    check_dim("x0", p.x_dim(), x.len())?;
    check_dim("z0", p.z_dim(), init.z0.len())?;
    check_dim("y0", p.coupling_dim(), init.y0.len())?;
    let y = match dual {
        DualRule::Zero => Vector::zeros(p.coupling_dim()),
        DualRule::Bounded(radius) => clip(init.y0.clone(), radius),
        _ => init.y0.clone(),
    };
    Ok((x, init.z0.clone(), y))
}

fn clip(y: Vector, radius: f64) -> Vector {
    let n = y.norm();
    if n > radius {
        y * (radius / n)
    } else {
        y
    }
}

fn finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}

#[allow(clippy::too_many_arguments)]
fn outer_loop(
    p: &StructuredProblem,
    schedule: &PenaltySchedule,
    dual: DualRule,
    init: &InitialPoint,
    stop: &StopRule,
    stop_kind: StopKind,
    meta: (Method, Option<DualPolicy>, GuaranteeRegime),
    mut step: impl FnMut(&Vector, &Vector, &Vector, f64) -> Result<Step>,
) -> Result<IterationTrace> {
    stop.validate()?;
    let (mut x, mut z, mut y) = start(p, init, dual)?;
    let mut records = Vec::with_capacity(stop.max_iters.min(10_000) + 1);
    records.push(record(p, 0, schedule.rho(0), (&x, &z, &y), (0.0, 0.0), (None, None)));
    let mut verdict = Verdict::MaxIters;
    for t in 0..stop.max_iters {
        let rho = schedule.rho(t);
        let s = step(&x, &z, &y, rho)?;
        let residual = p.residual_unchecked(&s.x, &s.z);
        let y_new = match dual {
            DualRule::Zero | DualRule::Fixed => y.clone(),
            DualRule::Recursion => &y + &residual * rho,
            DualRule::Bounded(radius) => clip(&y + &residual * rho, radius),
        };
        let dx = &s.x - &x;
        let dz = &s.z - &z;
        let primal_step = libm::sqrt(dx.norm_squared() + dz.norm_squared());
        let dual_step = (&y_new - &y).norm();
        x = s.x;
        z = s.z;
        y = y_new;
        let rec = record(
            p,
            t + 1,
            rho,
            (&x, &z, &y),
            (primal_step, dual_step),
            (Some(s.x_status), Some(s.z_status)),
        );
        let r = rec.primal_residual;
        records.push(rec);
        let exploded = !finite(&x)
            || !finite(&z)
            || !finite(&y)
            || x.norm() > stop.divergence_bound
            || z.norm() > stop.divergence_bound;
        if exploded {
            verdict = Verdict::Diverged;
            break;
        }
        let converged = r <= stop.primal_tol
            && match stop_kind {
                StopKind::Primal => primal_step <= stop.step_tol,
                StopKind::Dual => dual_step <= stop.step_tol,
            };
        if converged {
            verdict = Verdict::Converged;
            break;
        }
    }
    let (method, dual_policy, regime) = meta;
    let fon = if verdict == Verdict::Converged && stop_kind == StopKind::Dual {
        let last = records.last().expect("initial record");
        let pt = PrimalDualPoint::new(last.x.clone(), last.z.clone(), last.y.clone(), last.rho);
        Some(p.check_fon(&pt, stop.fon_tol)?)
    } else {
        None
    };
    Ok(IterationTrace {
        method,
        dual: dual_policy,
        regime,
        records,
        verdict,
        fon,
    })
}

fn split_step<'a>(
    p: &'a StructuredProblem,
    policy: &'a SolverPolicy,
) -> impl FnMut(&Vector, &Vector, &Vector, f64) -> Result<Step> + 'a {
    move |x, z, y, rho| {
        let xs = solve_block(&SubproblemSpec::x_update(p, z, y, rho, x.clone())?, policy)?;
        let zs = solve_block(&SubproblemSpec::z_update(p, &xs.minimizer, y, rho, z.clone())?, policy)?;
        Ok(Step {
            x: xs.minimizer,
            z: zs.minimizer,
            x_status: xs.status,
            z_status: zs.status,
        })
    }
}

/// Alternating direction penalty method: alternating block minimization of the
/// augmented Lagrangian under a divergent penalty with zero or bounded multipliers.
pub fn run_adpm(
    p: &StructuredProblem,
    schedule: &PenaltySchedule,
    dual: DualPolicy,
    init: &InitialPoint,
    policy: &SolverPolicy,
    stop: &StopRule,
) -> Result<IterationTrace> {
    if schedule.is_constant() {
        return Err(invalid!("the penalty method needs a divergent schedule; use ADMM for a constant penalty"));
    }
    let rule = match dual {
        DualPolicy::Zero => DualRule::Zero,
        DualPolicy::BoundedRecursion { radius } if radius > 0.0 => DualRule::Bounded(radius),
        DualPolicy::BoundedRecursion { .. } => return Err(invalid!("multiplier bound must be positive")),
        DualPolicy::MultiplierRecursion => {
            return Err(invalid!("the penalty method takes zero or bounded multipliers"))
        }
    };
    let regime = adpm_regime(p, schedule, dual);
    outer_loop(
        p,
        schedule,
        rule,
        init,
        stop,
        StopKind::Primal,
        (Method::Adpm, Some(dual), regime),
        split_step(p, policy),
    )
}

/// Alternating direction method of multipliers with a fixed penalty.
pub fn run_admm(
    p: &StructuredProblem,
    rho: f64,
    init: &InitialPoint,
    policy: &SolverPolicy,
    stop: &StopRule,
) -> Result<IterationTrace> {
    let schedule = PenaltySchedule::constant(rho)?;
    outer_loop(
        p,
        &schedule,
        DualRule::Recursion,
        init,
        stop,
        StopKind::Dual,
        (Method::Admm, Some(DualPolicy::MultiplierRecursion), GuaranteeRegime::MultiplierConvergence),
        split_step(p, policy),
    )
}

/// Joint minimization of the augmented Lagrangian over the stacked variable `(x, z)`.
struct JointSolver<'a> {
    p: &'a StructuredProblem,
    policy: SolverPolicy,
    objective: crate::problem::ObjectiveBlock,
    set: ConstraintSet,
    coupling: Matrix,
    mode: JointMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum JointMode {
    Stacked,
    Alternating,
}

impl<'a> JointSolver<'a> {
    fn new(p: &'a StructuredProblem, policy: &SolverPolicy) -> Result<Self> {
        let (p1, p2) = (p.x_dim(), p.z_dim());
        let objective = stacked_objective(p.f(), p.g());
        let set = ConstraintSet::product(alloc::vec![p.x_set().clone(), p.z_set().clone()])?;
        let mut coupling = Matrix::zeros(p.coupling_dim(), p1 + p2);
        coupling.view_mut((0, 0), (p.coupling_dim(), p1)).copy_from(p.a());
        coupling.view_mut((0, p1), (p.coupling_dim(), p2)).copy_from(p.b());
        let closed = objective.as_quadratic().is_some() && set.is_whole_space();
        let small_bounded = p1 + p2 <= 3 && set.bounding_box().is_some();
        let (strategy, mode) = match policy.strategy {
            Strategy::Auto if closed => (Strategy::ClosedForm, JointMode::Stacked),
            Strategy::Auto if small_bounded => (Strategy::GridGlobal, JointMode::Stacked),
            Strategy::Auto | Strategy::ScalarExact => (policy.strategy, JointMode::Alternating),
            s => (s, JointMode::Stacked),
        };
        Ok(Self {
            p,
            policy: SolverPolicy { strategy, ..policy.clone() },
            objective,
            set,
            coupling,
            mode,
        })
    }

    fn solve(&self, x: &Vector, z: &Vector, y: &Vector, rho: f64) -> Result<Step> {
        let (p1, p2) = (self.p.x_dim(), self.p.z_dim());
        match self.mode {
            JointMode::Stacked => {
                let mut warm = Vector::zeros(p1 + p2);
                warm.rows_mut(0, p1).copy_from(x);
                warm.rows_mut(p1, p2).copy_from(z);
                let m = &self.coupling;
                let spec = SubproblemSpec::new(
                    &self.objective,
                    m.tr_mul(&(y - self.p.c() * rho)),
                    m.tr_mul(m) * rho,
                    &self.set,
                    warm,
                )?;
                let sol = solve_block(&spec, &self.policy)?;
                Ok(Step {
                    x: sol.minimizer.rows(0, p1).into_owned(),
                    z: sol.minimizer.rows(p1, p2).into_owned(),
                    x_status: sol.status,
                    z_status: sol.status,
                })
            }
            JointMode::Alternating => {
                let mut cur_x = x.clone();
                let mut cur_z = z.clone();
                let mut status = SolveStatus::MaxIters;
                for _ in 0..JOINT_SWEEPS {
                    let xs = solve_block(&SubproblemSpec::x_update(self.p, &cur_z, y, rho, cur_x.clone())?, &self.policy)?;
                    let zs = solve_block(
                        &SubproblemSpec::z_update(self.p, &xs.minimizer, y, rho, cur_z.clone())?,
                        &self.policy,
                    )?;
                    let change = libm::sqrt((&xs.minimizer - &cur_x).norm_squared() + (&zs.minimizer - &cur_z).norm_squared());
                    cur_x = xs.minimizer;
                    cur_z = zs.minimizer;
                    if change <= self.policy.tol {
                        status = SolveStatus::Local;
                        break;
                    }
                }
                Ok(Step {
                    x: cur_x,
                    z: cur_z,
                    x_status: status,
                    z_status: status,
                })
            }
        }
    }
}

/// Quadratic penalty method: joint `(x, z)` minimization under a divergent
/// penalty with the multiplier fixed at `y0`.
pub fn run_quadratic_penalty(
    p: &StructuredProblem,
    schedule: &PenaltySchedule,
    init: &InitialPoint,
    policy: &SolverPolicy,
    stop: &StopRule,
) -> Result<IterationTrace> {
    if schedule.is_constant() {
        return Err(invalid!("the quadratic penalty method needs a divergent schedule"));
    }
    let joint = JointSolver::new(p, policy)?;
    outer_loop(
        p,
        schedule,
        DualRule::Fixed,
        init,
        stop,
        StopKind::Primal,
        (Method::QuadraticPenalty, None, GuaranteeRegime::None),
        |x, z, y, rho| joint.solve(x, z, y, rho),
    )
}

/// Method of multipliers: joint `(x, z)` minimization with multiplier recursion.
pub fn run_method_of_multipliers(
    p: &StructuredProblem,
    rho: f64,
    init: &InitialPoint,
    policy: &SolverPolicy,
    stop: &StopRule,
) -> Result<IterationTrace> {
    let schedule = PenaltySchedule::constant(rho)?;
    let joint = JointSolver::new(p, policy)?;
    outer_loop(
        p,
        &schedule,
        DualRule::Recursion,
        init,
        stop,
        StopKind::Dual,
        (
            Method::MethodOfMultipliers,
            Some(DualPolicy::MultiplierRecursion),
            GuaranteeRegime::MultiplierConvergence,
        ),
        |x, z, y, rho| joint.solve(x, z, y, rho),
    )
}

