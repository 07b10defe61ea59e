use alloc::vec::Vec;

use crate::algorithms::{
    DualPolicy, GuaranteeRegime, IterationRecord, IterationTrace, Method, PenaltySchedule, Verdict,
};
use crate::error::{invalid, Result};
use crate::linalg::{Matrix, Vector};
use crate::problem::{ConstraintSet, FonCertificate, ObjectiveBlock, PrimalDualPoint, StructuredProblem};
use crate::subsolvers::{solve_block, SolveStatus, SolverPolicy, Strategy, SubproblemSpec};

use super::layout::{build_problem, CopyLayout};
use super::network::{rmse, Point, SensorNetwork};

/// Runs independent per-node work. Implementations must return results in
/// node order so that runs are reproducible for any worker count.
pub trait NodeExecutor {
    fn map_nodes<R, F>(&self, count: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl NodeExecutor for Sequential {
    fn map_nodes<R, F>(&self, count: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LocalizationAlgo {
    /// Penalty method with `y ≡ 0`.
    Adpm { schedule: PenaltySchedule },
    /// Penalty method with the multiplier recursion.
    AdpmY { schedule: PenaltySchedule },
    Admm { rho: f64 },
    /// Gradient steps of length `1/ρ(t)` followed by averaging.
    Dgd { schedule: PenaltySchedule },
}

pub const TABLE_NAMES: [&str; 5] = ["adpm", "adpm-y", "admm-1", "admm-10", "dgd"];

impl LocalizationAlgo {
    /// The benchmark settings; growing penalties use `ρ(t) = t + 1`.
    pub fn from_table_name(name: &str) -> Result<Self> {
        let growing = || PenaltySchedule::linear(1.0, 1.0);
        Ok(match name {
            "adpm" => Self::Adpm { schedule: growing()? },
            "adpm-y" => Self::AdpmY { schedule: growing()? },
            "admm-1" => Self::Admm { rho: 1.0 },
            "admm-10" => Self::Admm { rho: 10.0 },
            "dgd" => Self::Dgd { schedule: growing()? },
            other => return Err(invalid!("unknown algorithm setting '{other}'")),
        })
    }

    fn rho(&self, t: usize) -> f64 {
        match self {
            Self::Adpm { schedule } | Self::AdpmY { schedule } | Self::Dgd { schedule } => schedule.rho(t),
            Self::Admm { rho } => *rho,
        }
    }

    fn updates_dual(&self) -> bool {
        matches!(self, Self::AdpmY { .. } | Self::Admm { .. })
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Admm { rho } if !(*rho > 0.0) || !rho.is_finite() => {
                Err(invalid!("ADMM penalty must be positive, got {rho}"))
            }
            Self::Adpm { schedule } | Self::AdpmY { schedule } | Self::Dgd { schedule }
                if schedule.is_constant() =>
            {
                Err(invalid!("penalty and gradient settings need a growing schedule"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZUpdateRule {
    /// Exact minimizer of the augmented Lagrangian over `z`: the average of
    /// `x + y/ρ` over every copy of a sensor.
    ExactMinimizer,
    /// Average over the copies held by sensor neighbors only, as the averaging
    /// step is often written. Falls back to the exact rule for sensors
    /// without sensor neighbors.
    LiteralAveraging,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationRunConfig {
    pub algo: LocalizationAlgo,
    pub iterations: usize,
    /// Starting sensor estimates; every sensor at `(0.5, 0.5)` by default.
    pub z_init: Option<Vec<Point>>,
    pub z_update: ZUpdateRule,
    pub policy: SolverPolicy,
    pub divergence_bound: f64,
    pub fon_tol: f64,
    pub allow_flagged: bool,
}

impl LocalizationRunConfig {
    pub fn new(algo: LocalizationAlgo) -> Self {
        Self {
            algo,
            iterations: 5000,
            z_init: None,
            z_update: ZUpdateRule::ExactMinimizer,
            policy: SolverPolicy::new(Strategy::ProjectedGradient),
            divergence_bound: 1e6,
            fon_tol: 1e-6,
            allow_flagged: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.policy.seed = seed;
        self
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn with_z_init(mut self, z_init: Vec<Point>) -> Self {
        self.z_init = Some(z_init);
        self
    }

    pub fn with_z_update(mut self, rule: ZUpdateRule) -> Self {
        self.z_update = rule;
        self
    }
}

/// Per-iteration quantities beyond the common trace record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationRecord {
    /// `‖Eᵀ∇f(x)‖`.
    pub consensus_gradient_norm: f64,
    /// `maxₙ ‖xₙ - Eₙz‖`.
    pub max_node_residual: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationRun {
    pub trace: IterationTrace,
    /// Aligned with `trace.records`.
    pub extras: Vec<LocalizationRecord>,
    pub estimates: Vec<Point>,
    /// Node subproblems that failed; the previous copy vector was kept.
    pub node_failures: usize,
    /// First-order certificate at the final iterate; absent after divergence.
    pub fon: Option<FonCertificate>,
}

struct Setup {
    problem: StructuredProblem,
    layout: CopyLayout,
    blocks: Vec<ObjectiveBlock>,
    sets: Vec<ConstraintSet>,
}

fn setup(net: &SensorNetwork, cfg: &LocalizationRunConfig) -> Result<Setup> {
    cfg.algo.validate()?;
    cfg.policy.validate()?;
    if cfg.iterations == 0 || !(cfg.divergence_bound > 0.0) || !(cfg.fon_tol > 0.0) {
        return Err(invalid!("iterations, divergence bound and certificate tolerance must be positive"));
    }
    let (problem, layout) = build_problem(net, cfg.allow_flagged)?;
    let mut blocks = Vec::with_capacity(layout.node_count());
    let mut sets = Vec::with_capacity(layout.node_count());
    for node in 0..layout.node_count() {
        blocks.push(layout.node_objective(net, node)?);
        sets.push(ConstraintSet::whole_space(layout.range(node).len().max(1))?);
    }
    Ok(Setup { problem, layout, blocks, sets })
}

fn initial_z(net: &SensorNetwork, cfg: &LocalizationRunConfig) -> Result<Vector> {
    let s = net.sensor_count();
    match &cfg.z_init {
        None => Ok(Vector::from_element(2 * s, 0.5)),
        Some(points) if points.len() == s => {
            Ok(Vector::from_iterator(2 * s, points.iter().flat_map(|p| p.iter().copied())))
        }
        Some(points) => Err(invalid!("z_init has {} points for {s} sensors", points.len())),
    }
}

fn z_update(layout: &CopyLayout, rule: ZUpdateRule, x: &Vector, y: &Vector, rho: f64) -> Vector {
    let mut z = Vector::zeros(layout.z_dim());
    for m in 0..layout.sensor_count() {
        let all = layout.holders(m);
        let neighbors: Vec<(usize, usize)> = all.iter().copied().filter(|&(node, _)| node != m && node < layout.sensor_count()).collect();
        let used: &[(usize, usize)] = match rule {
            ZUpdateRule::LiteralAveraging if !neighbors.is_empty() => &neighbors,
            _ => all,
        };
        for &(node, slot) in used {
            let k = layout.range(node).start + 2 * slot;
            z[2 * m] += x[k] + y[k] / rho;
            z[2 * m + 1] += x[k + 1] + y[k + 1] / rho;
        }
        let count = used.len() as f64;
        z[2 * m] /= count;
        z[2 * m + 1] /= count;
    }
    z
}

fn severity(s: SolveStatus) -> u8 {
    match s {
        SolveStatus::Global => 0,
        SolveStatus::GlobalGrid => 1,
        SolveStatus::Local => 2,
        SolveStatus::MaxIters => 3,
    }
}

fn finite(v: &Vector) -> bool {
    v.iter().all(|e| e.is_finite())
}

struct Recorder<'a> {
    setup: &'a Setup,
    net: &'a SensorNetwork,
    records: Vec<IterationRecord>,
    extras: Vec<LocalizationRecord>,
}

impl Recorder<'_> {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        t: usize,
        rho: f64,
        (x, z, y): (&Vector, &Vector, &Vector),
        (primal_step, dual_step): (f64, f64),
        statuses: (Option<SolveStatus>, Option<SolveStatus>),
    ) -> Result<()> {
        let layout = &self.setup.layout;
        let r = x - layout.spread(z);
        let grad_f = self.setup.problem.f().gradient(x.as_slice());
        let lagr_x = &grad_f + y + &r * rho;
        let lagr_z = layout.gather(&(y + &r * rho));
        let max_node_residual = (0..layout.node_count())
            .map(|n| r.rows_range(layout.range(n)).norm())
            .fold(0.0, f64::max);
        let estimates = to_points(z);
        self.extras.push(LocalizationRecord {
            consensus_gradient_norm: layout.gather(&grad_f).norm(),
            max_node_residual,
            rmse: rmse(&estimates, self.net)?,
        });
        self.records.push(IterationRecord {
            t,
            rho,
            x: x.clone(),
            z: z.clone(),
            y: y.clone(),
            primal_residual: r.norm(),
            stationarity_norm: libm::sqrt(lagr_x.norm_squared() + lagr_z.norm_squared()),
            objective: self.setup.problem.f().value(x.as_slice()),
            dual_step_norm: dual_step,
            primal_step_norm: primal_step,
            x_status: statuses.0,
            z_status: statuses.1,
        });
        Ok(())
    }
}

fn to_points(z: &Vector) -> Vec<Point> {
    z.as_slice().chunks_exact(2).map(|c| [c[0], c[1]]).collect()
}

/// Per-node update: `(new copy vector, status)` or `None` when the node
/// holds no copies or its solve failed.
type NodeStep = Option<(Vector, SolveStatus, bool)>;

/// Distributed alternating direction Lagrangian method.
///
/// Each iteration solves every node's local subproblem (concurrently through
/// `exec`), replaces `z` by the averaging step and updates the multipliers
/// according to the chosen setting.
pub fn run_dadlm<E: NodeExecutor>(
    net: &SensorNetwork,
    cfg: &LocalizationRunConfig,
    exec: &E,
) -> Result<LocalizationRun> {
    if matches!(cfg.algo, LocalizationAlgo::Dgd { .. }) {
        return Err(invalid!("gradient setting runs through run_dgd"));
    }
    let setup = setup(net, cfg)?;
    let (method, dual) = (
        Method::DistributedAdlm,
        if cfg.algo.updates_dual() { DualPolicy::MultiplierRecursion } else { DualPolicy::Zero },
    );
    let regime = match cfg.algo {
        LocalizationAlgo::Adpm { .. } => GuaranteeRegime::UnconstrainedPenalty,
        LocalizationAlgo::Admm { .. } => GuaranteeRegime::MultiplierConvergence,
        _ => GuaranteeRegime::None,
    };
    outer(net, cfg, exec, &setup, (method, dual, regime), |x, z, y, rho, exec| {
        let layout = &setup.layout;
        let ez = layout.spread(z);
        exec.map_nodes(layout.node_count(), |n| -> NodeStep {
            let range = layout.range(n);
            if range.is_empty() {
                return None;
            }
            let shift = y.rows_range(range.clone()) - ez.rows_range(range.clone()) * rho;
            let dim = range.len();
            let warm = x.rows_range(range).into_owned();
            let spec = SubproblemSpec::new(
                &setup.blocks[n],
                shift,
                Matrix::identity(dim, dim) * rho,
                &setup.sets[n],
                warm,
            );
            match spec.and_then(|s| solve_block(&s, &cfg.policy)) {
                Ok(sol) if finite(&sol.minimizer) => Some((sol.minimizer, sol.status, false)),
                _ => Some((x.rows_range(layout.range(n)).into_owned(), SolveStatus::MaxIters, true)),
            }
        })
    })
}

/// Distributed gradient descent: `xₙ = Eₙz - ∇fₙ(Eₙz)/ρ(t)`, then averaging.
pub fn run_dgd<E: NodeExecutor>(net: &SensorNetwork, cfg: &LocalizationRunConfig, exec: &E) -> Result<LocalizationRun> {
    if !matches!(cfg.algo, LocalizationAlgo::Dgd { .. }) {
        return Err(invalid!("run_dgd needs the gradient setting"));
    }
    let setup = setup(net, cfg)?;
    let meta = (Method::DistributedGradient, DualPolicy::Zero, GuaranteeRegime::None);
    outer(net, cfg, exec, &setup, meta, |_x, z, _y, rho, exec| {
        let layout = &setup.layout;
        let ez = layout.spread(z);
        exec.map_nodes(layout.node_count(), |n| -> NodeStep {
            let range = layout.range(n);
            if range.is_empty() {
                return None;
            }
            let xbar = ez.rows_range(range).into_owned();
            let grad = setup.blocks[n].gradient(xbar.as_slice());
            Some((xbar - grad / rho, SolveStatus::Global, false))
        })
    })
}

fn outer<E: NodeExecutor>(
    net: &SensorNetwork,
    cfg: &LocalizationRunConfig,
    exec: &E,
    setup: &Setup,
    (method, dual, regime): (Method, DualPolicy, GuaranteeRegime),
    node_steps: impl Fn(&Vector, &Vector, &Vector, f64, &E) -> Vec<NodeStep>,
) -> Result<LocalizationRun> {
    let layout = &setup.layout;
    let mut z = initial_z(net, cfg)?;
    let mut y = Vector::zeros(layout.x_dim());
    let mut x = layout.spread(&z);
    let mut rec = Recorder {
        setup,
        net,
        records: Vec::with_capacity(cfg.iterations + 1),
        extras: Vec::with_capacity(cfg.iterations + 1),
    };
    rec.push(0, cfg.algo.rho(0), (&x, &z, &y), (0.0, 0.0), (None, None))?;
    let mut verdict = Verdict::MaxIters;
    let mut node_failures = 0;
    for t in 0..cfg.iterations {
        let rho = cfg.algo.rho(t);
        let steps = node_steps(&x, &z, &y, rho, exec);
        let mut x_new = x.clone();
        let mut worst = SolveStatus::Global;
        for (n, step) in steps.into_iter().enumerate() {
            if let Some((xn, status, failed)) = step {
                x_new.rows_range_mut(layout.range(n)).copy_from(&xn);
                if severity(status) > severity(worst) {
                    worst = status;
                }
                node_failures += usize::from(failed);
            }
        }
        let z_new = z_update(layout, cfg.z_update, &x_new, &y, rho);
        let y_new = if cfg.algo.updates_dual() {
            &y + (&x_new - layout.spread(&z_new)) * rho
        } else {
            y.clone()
        };
        let primal_step = libm::sqrt((&x_new - &x).norm_squared() + (&z_new - &z).norm_squared());
        let dual_step = (&y_new - &y).norm();
        x = x_new;
        z = z_new;
        y = y_new;
        let exploded = !finite(&x)
            || !finite(&z)
            || !finite(&y)
            || x.norm() > cfg.divergence_bound
            || z.norm() > cfg.divergence_bound;
        rec.push(t + 1, rho, (&x, &z, &y), (primal_step, dual_step), (Some(worst), Some(SolveStatus::Global)))?;
        if exploded {
            verdict = Verdict::Diverged;
            break;
        }
    }
    let fon = if verdict == Verdict::Diverged {
        None
    } else if cfg.algo.updates_dual() {
        let pt = PrimalDualPoint::new(x.clone(), z.clone(), y.clone(), rec.records.last().map_or(1.0, |r| r.rho));
        Some(setup.problem.check_fon(&pt, cfg.fon_tol)?)
    } else {
        Some(setup.problem.check_fon_recovering_dual(&x, &z, cfg.fon_tol)?)
    };
    Ok(LocalizationRun {
        trace: IterationTrace { method, dual: Some(dual), regime, records: rec.records, verdict, fon: None },
        extras: rec.extras,
        estimates: to_points(&z),
        node_failures,
        fon,
    })
}
