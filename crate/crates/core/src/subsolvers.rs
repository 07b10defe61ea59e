//! Block subproblem solvers for `min h(v) + wᵀv + ½ vᵀPv  s.t.  v ∈ V`.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::{inf_norm, is_symmetric, least_squares, norm, Matrix, Vector};
use crate::problem::{ConstraintSet, ObjectiveBlock, StructuredProblem};
use crate::sampling::{stream, stream_rng};

/// Target for `|φ'|` in the scalar paths.
const DERIVATIVE_TOL: f64 = 1e-12;
const VALUE_RTOL: f64 = 1e-13;
/// Armijo constant of the sufficient-decrease test.
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 80;
/// Half-width of the search window on unbounded pieces without a strong-convexity bracket.
const HEURISTIC_WINDOW: f64 = 1e3;

/// One block subproblem in canonical form.
#[derive(Debug, Clone)]
pub struct SubproblemSpec<'a> {
    pub objective: &'a ObjectiveBlock,
    /// `w` in `h(v) + wᵀv + ½ vᵀPv`.
    pub linear_shift: Vector,
    /// `P`, symmetric positive semidefinite.
    pub penalty_matrix: Matrix,
    pub set: &'a ConstraintSet,
    pub warm_start: Vector,
}

impl<'a> SubproblemSpec<'a> {
    pub fn new(
        objective: &'a ObjectiveBlock,
        linear_shift: Vector,
        penalty_matrix: Matrix,
        set: &'a ConstraintSet,
        warm_start: Vector,
    ) -> Result<Self> {
        let n = objective.dim();
        check_dim("subproblem shift", n, linear_shift.len())?;
        check_dim("subproblem penalty rows", n, penalty_matrix.nrows())?;
        check_dim("subproblem penalty cols", n, penalty_matrix.ncols())?;
        check_dim("subproblem set", n, set.dim())?;
        check_dim("subproblem warm start", n, warm_start.len())?;
        if !is_symmetric(&penalty_matrix) {
            return Err(invalid!("penalty matrix must be symmetric"));
        }
        Ok(Self {
            objective,
            linear_shift,
            penalty_matrix,
            set,
            warm_start,
        })
    }

    /// `x`-update of the augmented Lagrangian at `(z, y, ρ)`:
    /// `w = Aᵀy + ρAᵀ(Bz - c)`, `P = ρAᵀA`.
    pub fn x_update(p: &'a StructuredProblem, z: &Vector, y: &Vector, rho: f64, warm: Vector) -> Result<Self> {
        check_dim("z", p.z_dim(), z.len())?;
        check_dim("y", p.coupling_dim(), y.len())?;
        let m = y + (p.b() * z - p.c()) * rho;
        Self::new(p.f(), p.a().tr_mul(&m), p.a().tr_mul(p.a()) * rho, p.x_set(), warm)
    }

    /// `z`-update of the augmented Lagrangian at `(x, y, ρ)`:
    /// `w = Bᵀy + ρBᵀ(Ax - c)`, `P = ρBᵀB`.
    pub fn z_update(p: &'a StructuredProblem, x: &Vector, y: &Vector, rho: f64, warm: Vector) -> Result<Self> {
        check_dim("x", p.x_dim(), x.len())?;
        check_dim("y", p.coupling_dim(), y.len())?;
        let m = y + (p.a() * x - p.c()) * rho;
        Self::new(p.g(), p.b().tr_mul(&m), p.b().tr_mul(p.b()) * rho, p.z_set(), warm)
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    /// `h(v) + wᵀv + ½ vᵀPv`.
    pub fn value(&self, v: &[f64]) -> f64 {
        let n = v.len();
        let mut quad = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.penalty_matrix[(i, j)] * v[j];
            }
            quad += v[i] * (0.5 * row + self.linear_shift[i]);
        }
        self.objective.value(v) + quad
    }

    pub fn gradient(&self, v: &[f64]) -> Vector {
        let mut g = self.linear_shift.clone();
        self.objective.add_gradient(v, g.as_mut_slice());
        let n = v.len();
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.penalty_matrix[(i, j)] * v[j];
            }
            g[i] += row;
        }
        g
    }

    fn derivative_1d(&self, v: f64) -> f64 {
        self.objective.derivative_1d(v) + self.linear_shift[0] + self.penalty_matrix[(0, 0)] * v
    }

    fn second_derivative_1d(&self, v: f64) -> f64 {
        self.objective.second_derivative_1d(v) + self.penalty_matrix[(0, 0)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Auto,
    ClosedForm,
    ProjectedGradient,
    GridGlobal,
    ScalarExact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverPolicy {
    pub strategy: Strategy,
    pub tol: f64,
    pub max_inner_iters: usize,
    pub grid_points_per_dim: usize,
    pub multistart_count: usize,
    /// Seed of the multistart stream.
    pub seed: u64,
}

impl SolverPolicy {
    /// Defaults: `tol` 1e-8 for projected gradient, 1e-10 otherwise.
    pub fn new(strategy: Strategy) -> Self {
        Self {
            strategy,
            tol: if strategy == Strategy::ProjectedGradient { 1e-8 } else { 1e-10 },
            max_inner_iters: 10_000,
            grid_points_per_dim: 1001,
            multistart_count: 1,
            seed: 0,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_inner_iters(mut self, iters: usize) -> Self {
        self.max_inner_iters = iters;
        self
    }

    pub fn with_grid_points(mut self, points: usize) -> Self {
        self.grid_points_per_dim = points;
        self
    }

    pub fn with_multistart(mut self, count: usize, seed: u64) -> Self {
        self.multistart_count = count;
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(invalid!("solver tolerance must be positive"));
        }
        if self.max_inner_iters == 0 || self.multistart_count == 0 {
            return Err(invalid!("inner iteration and multistart counts must be positive"));
        }
        if self.grid_points_per_dim < 2 {
            return Err(invalid!("grid needs at least two points per dimension"));
        }
        Ok(())
    }
}

impl Default for SolverPolicy {
    fn default() -> Self {
        Self::new(Strategy::Auto)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Global,
    /// Best point of a grid search after local polishing.
    GlobalGrid,
    Local,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSolution {
    pub minimizer: Vector,
    pub value: f64,
    pub status: SolveStatus,
    pub iterations: usize,
}

/// Euclidean projection onto a special-form set.
pub fn project(set: &ConstraintSet, v: &[f64]) -> Result<Vector> {
    set.project(v)
}

/// Solves one block subproblem.
///
/// The returned value never exceeds the value at a feasible warm start by
/// more than rounding.
pub fn solve_block(spec: &SubproblemSpec<'_>, policy: &SolverPolicy) -> Result<BlockSolution> {
    policy.validate()?;
    let solution = match policy.strategy {
        Strategy::Auto => solve_auto(spec, policy)?,
        Strategy::ClosedForm => closed_form(spec)?
            .ok_or_else(|| Error::Unsupported("closed form needs a convex quadratic objective".to_string()))?,
        Strategy::ProjectedGradient => projected_gradient_multistart(spec, policy)?,
        Strategy::GridGlobal => grid_global(spec, policy)?,
        Strategy::ScalarExact => scalar_exact(spec, policy)?,
    };
    Ok(keep_warm_if_better(spec, solution))
}

fn keep_warm_if_better(spec: &SubproblemSpec<'_>, solution: BlockSolution) -> BlockSolution {
    let warm = spec.warm_start.as_slice();
    if spec.set.violation(warm) <= 1e-12 {
        let warm_value = spec.value(warm);
        // value differences at rounding level must not undo an accurate solve
        let margin = VALUE_RTOL * (1.0 + solution.value.abs().max(warm_value.abs()));
        if warm_value < solution.value - margin {
            return BlockSolution {
                minimizer: spec.warm_start.clone(),
                value: warm_value,
                status: match solution.status {
                    SolveStatus::MaxIters => SolveStatus::MaxIters,
                    _ => SolveStatus::Local,
                },
                iterations: solution.iterations,
            };
        }
    }
    solution
}

fn solve_auto(spec: &SubproblemSpec<'_>, policy: &SolverPolicy) -> Result<BlockSolution> {
    if spec.set.is_whole_space() {
        if let Some(sol) = closed_form(spec)? {
            return Ok(sol);
        }
    }
    if spec.dim() == 1 && spec.set.pieces_1d().is_some() {
        return scalar_exact(spec, policy);
    }
    if spec.set.is_projectable() {
        return projected_gradient_multistart(spec, policy);
    }
    Err(Error::Unsupported(
        "no subproblem path for a non-quadratic objective on a functional set".to_string(),
    ))
}

/// Stationary solve of a convex quadratic subproblem on the whole space.
///
/// Returns `Ok(None)` when the objective is not quadratic or the quadratic
/// form is indefinite.
fn closed_form(spec: &SubproblemSpec<'_>) -> Result<Option<BlockSolution>> {
    if !spec.set.is_whole_space() {
        return Err(Error::Unsupported("closed form needs the whole space".to_string()));
    }
    let Some((q_mat, q, _)) = spec.objective.as_quadratic() else {
        return Ok(None);
    };
    let hessian = q_mat * 2.0 + &spec.penalty_matrix;
    let rhs = -(q + &spec.linear_shift);
    let minimizer = match hessian.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        None => {
            let eig = hessian.clone().symmetric_eigen().eigenvalues;
            let scale = eig.iter().fold(1.0f64, |m, e| m.max(e.abs()));
            if eig.iter().any(|e| *e < -1e-12 * scale) {
                return Ok(None);
            }
            let v = least_squares(&hessian, &rhs);
            if (&hessian * &v - &rhs).norm() > 1e-9 * (1.0 + rhs.norm()) {
                return Err(Error::Unsupported("quadratic subproblem is unbounded below".to_string()));
            }
            v
        }
    };
    let value = spec.value(minimizer.as_slice());
    Ok(Some(BlockSolution {
        minimizer,
        value,
        status: SolveStatus::Global,
        iterations: 1,
    }))
}

/// Curvature estimate of the objective near `v` from finite gradient differences.
fn curvature_estimate(objective: &ObjectiveBlock, v: &[f64], g: &[f64]) -> f64 {
    let n = v.len();
    let h = 1e-4 * (1.0 + norm(v));
    let base = objective.gradient(v);
    let mut dirs: Vec<Vec<f64>> = (0..n.min(4))
        .map(|k| {
            let mut d = vec![0.0; n];
            d[k] = 1.0;
            d
        })
        .collect();
    let gn = norm(g);
    if gn > 0.0 {
        dirs.push(g.iter().map(|x| x / gn).collect());
    }
    let mut best: f64 = 0.0;
    let mut shifted = vec![0.0; n];
    for d in dirs {
        for k in 0..n {
            shifted[k] = v[k] + h * d[k];
        }
        let diff = (objective.gradient(&shifted) - &base).norm() / h;
        if diff.is_finite() {
            best = best.max(diff);
        }
    }
    best
}

struct PgOutcome {
    point: Vector,
    value: f64,
    iterations: usize,
    converged: bool,
}

/// Monotone projected gradient with Armijo backtracking. Trial steps are
/// Barzilai-Borwein lengths when the last step saw positive curvature and a
/// doubled previous step otherwise.
///
/// Stops when the gradient mapping `‖v - Π(v - s∇φ)‖ / s` is at most `tol`,
/// or when no step along the projection arc decreases the value.
///
/// Decreases are evaluated as `f(v+d) - f(v) + dᵀ(w + Pv) + ½dᵀPd`, so that a
/// large penalty term does not drown them in rounding.
fn projected_gradient(spec: &SubproblemSpec<'_>, start: &[f64], tol: f64, max_iters: usize) -> Result<PgOutcome> {
    let n = spec.dim();
    let p = &spec.penalty_matrix;
    let mut v = spec.set.project(start)?;
    let mut obj_v = spec.objective.value(v.as_slice());
    let mut qv = &spec.linear_shift + p * &v;
    let mut g = qv.clone();
    spec.objective.add_gradient(v.as_slice(), g.as_mut_slice());
    let lhat = curvature_estimate(spec.objective, v.as_slice(), g.as_slice());
    let denom = inf_norm(p) + lhat;
    let mut step = if denom > 0.0 { 1.0 / denom } else { 1.0 };
    let mut cand = Vector::zeros(n);
    let mut prev: Option<(Vector, Vector)> = None;
    let mut converged = false;
    let mut iterations = max_iters;
    'outer: for it in 0..max_iters {
        if let Some((dv, dg)) = prev.take() {
            let curv = dv.dot(&dg);
            step = if curv > 0.0 { (dv.norm_squared() / curv).clamp(1e-3 * step, 1e3 * step) } else { 2.0 * step };
        }
        for _ in 0..MAX_BACKTRACKS {
            for k in 0..n {
                cand[k] = v[k] - step * g[k];
            }
            spec.set.project_into(cand.as_mut_slice())?;
            let d = &cand - &v;
            let moved = d.norm();
            let obj_c = spec.objective.value(cand.as_slice());
            let pd = p * &d;
            let delta = (obj_c - obj_v) + d.dot(&qv) + 0.5 * d.dot(&pd);
            if moved == 0.0 || moved / step <= tol {
                if delta <= 0.0 {
                    v.copy_from(&cand);
                }
                converged = true;
                iterations = it + 1;
                break 'outer;
            }
            if delta <= -ARMIJO / step * moved * moved {
                qv += pd;
                let mut g_new = qv.clone();
                spec.objective.add_gradient(cand.as_slice(), g_new.as_mut_slice());
                prev = Some((d, &g_new - &g));
                v.copy_from(&cand);
                obj_v = obj_c;
                g = g_new;
                if !obj_v.is_finite() {
                    iterations = it + 1;
                    break 'outer;
                }
                continue 'outer;
            }
            step *= 0.5;
        }
        // no decrease available at floating-point resolution
        converged = true;
        iterations = it + 1;
        break;
    }
    let value = spec.value(v.as_slice());
    Ok(PgOutcome { point: v, value, iterations, converged })
}

fn projected_gradient_multistart(spec: &SubproblemSpec<'_>, policy: &SolverPolicy) -> Result<BlockSolution> {
    let mut best = projected_gradient(spec, spec.warm_start.as_slice(), policy.tol, policy.max_inner_iters)?;
    let mut iterations = best.iterations;
    if policy.multistart_count > 1 {
        let mut rng = stream_rng(policy.seed, stream::MULTISTART);
        let (lo, hi) = spec.set.bounding_box().unwrap_or_else(|| {
            let w = spec.warm_start.as_slice();
            (w.iter().map(|x| x - 1.0).collect(), w.iter().map(|x| x + 1.0).collect())
        });
        for _ in 1..policy.multistart_count {
            let start: Vec<f64> = lo
                .iter()
                .zip(&hi)
                .map(|(l, h)| l + (h - l) * rng.random::<f64>())
                .collect();
            let run = projected_gradient(spec, &start, policy.tol, policy.max_inner_iters)?;
            iterations += run.iterations;
            if run.value < best.value {
                best = run;
            }
        }
    }
    Ok(BlockSolution {
        minimizer: best.point,
        value: best.value,
        status: if best.converged { SolveStatus::Local } else { SolveStatus::MaxIters },
        iterations,
    })
}

/// Interval endpoints per coordinate, added to the uniform grid.
fn breakpoints(set: &ConstraintSet, axes: &mut [Vec<f64>]) {
    use crate::problem::SetForm;
    match set.form() {
        SetForm::IntervalUnion { intervals } => {
            for &(lo, hi) in intervals {
                axes[0].push(lo);
                axes[0].push(hi);
            }
        }
        SetForm::Product(parts) => {
            let mut offset = 0;
            for p in parts {
                breakpoints(p, &mut axes[offset..offset + p.dim()]);
                offset += p.dim();
            }
        }
        _ => {}
    }
}

/// Exhaustive evaluation on a grid over the bounding box, then local polish.
fn grid_global(spec: &SubproblemSpec<'_>, policy: &SolverPolicy) -> Result<BlockSolution> {
    let n = spec.dim();
    if n > 3 {
        return Err(Error::Unsupported(format!("grid search admits dimension <= 3, got {n}")));
    }
    let (lo, hi) = spec
        .set
        .bounding_box()
        .ok_or_else(|| Error::Unsupported("grid search needs a bounded special-form set".to_string()))?;
    let m = policy.grid_points_per_dim;
    let mut axes: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            if lo[k] == hi[k] {
                vec![lo[k]]
            } else {
                (0..m)
                    .map(|i| lo[k] + (hi[k] - lo[k]) * i as f64 / (m - 1) as f64)
                    .collect()
            }
        })
        .collect();
    breakpoints(spec.set, &mut axes);
    for axis in &mut axes {
        axis.sort_by(f64::total_cmp);
        axis.dedup();
    }

    let mut idx = vec![0usize; n];
    let mut point = vec![0.0; n];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut evaluated = 0usize;
    'outer: loop {
        for k in 0..n {
            point[k] = axes[k][idx[k]];
        }
        if spec.set.violation(&point) <= 1e-12 {
            let value = spec.value(&point);
            evaluated += 1;
            if best.as_ref().is_none_or(|(bv, _)| value < *bv) {
                best = Some((value, point.clone()));
            }
        }
        // odometer with the last coordinate fastest keeps lexicographic order
        let mut k = n;
        loop {
            if k == 0 {
                break 'outer;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
    let (grid_value, grid_point) = match best {
        Some(b) => b,
        None => {
            let center: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
            let p = spec.set.project(&center)?;
            (spec.value(p.as_slice()), p.as_slice().to_vec())
        }
    };
    // Polish the best grid point and the warm start: at large penalties the
    // grid cannot resolve the valley, and the warm start carries continuation.
    let mut best_polished = projected_gradient(spec, &grid_point, policy.tol, policy.max_inner_iters)?;
    let mut iterations = evaluated + best_polished.iterations;
    if spec.set.violation(spec.warm_start.as_slice()) <= 1e-12 {
        let from_warm = projected_gradient(spec, spec.warm_start.as_slice(), policy.tol, policy.max_inner_iters)?;
        iterations += from_warm.iterations;
        let better = from_warm.value < best_polished.value
            || (from_warm.value == best_polished.value && lexicographic_less(&from_warm.point, &best_polished.point));
        if better {
            best_polished = from_warm;
        }
    }
    let status = if best_polished.converged { SolveStatus::GlobalGrid } else { SolveStatus::MaxIters };
    let (minimizer, value) = if best_polished.value <= grid_value {
        (best_polished.point, best_polished.value)
    } else {
        (Vector::from_vec(grid_point), grid_value)
    };
    Ok(BlockSolution {
        minimizer,
        value,
        status,
        iterations,
    })
}

fn lexicographic_less(a: &Vector, b: &Vector) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if x != y {
            return x < y;
        }
    }
    false
}

/// Safeguarded Newton on a sign-changing bracket.
///
/// `hd` returns the function value and a slope estimate. Terminates when
/// `|h| <= DERIVATIVE_TOL` or the bracket reaches floating-point resolution.
fn safeguarded_root(mut hd: impl FnMut(f64) -> (f64, f64), a: f64, b: f64, start: f64) -> f64 {
    let (fa, _) = hd(a);
    if fa == 0.0 {
        return a;
    }
    let (fb, _) = hd(b);
    if fb == 0.0 {
        return b;
    }
    // orient so that h(neg) < 0 < h(pos)
    let (mut neg, mut pos) = if fa < 0.0 { (a, b) } else { (b, a) };
    let mut x = if start > a.min(b) && start < a.max(b) { start } else { 0.5 * (a + b) };
    let mut dx_old = (b - a).abs();
    let mut dx = dx_old;
    let (mut fx, mut dfx) = hd(x);
    let mut best = (fx.abs(), x);
    for _ in 0..400 {
        if fx.abs() <= DERIVATIVE_TOL {
            return x;
        }
        if fx < 0.0 {
            neg = x;
        } else {
            pos = x;
        }
        let newton_ok = dfx.is_finite()
            && dfx != 0.0
            && ((x - pos) * dfx - fx) * ((x - neg) * dfx - fx) < 0.0
            && (2.0 * fx).abs() <= (dx_old * dfx).abs();
        dx_old = dx;
        if newton_ok {
            dx = fx / dfx;
            x -= dx;
        } else {
            dx = 0.5 * (pos - neg);
            x = neg + dx;
        }
        if dx == 0.0 || (pos - neg).abs() <= 4.0 * f64::EPSILON * neg.abs().max(pos.abs()) {
            let (f_end, _) = hd(x);
            if f_end.abs() < best.0 {
                best = (f_end.abs(), x);
            }
            return best.1;
        }
        (fx, dfx) = hd(x);
        if fx.abs() < best.0 {
            best = (fx.abs(), x);
        }
    }
    best.1
}

/// Unique root of `fprime(x) + shift + ρ(x - anchor)` when `ρ > lipschitz`.
///
/// The root lies within `|fprime(anchor) + shift| / (ρ - L)` of `anchor`;
/// Newton steps use secant slopes of `fprime` with bisection fallback.
pub fn scalar_strongly_convex_solve(
    fprime: impl Fn(f64) -> f64,
    lipschitz: f64,
    shift: f64,
    rho: f64,
    anchor: f64,
    warm: f64,
) -> Result<f64> {
    if !(rho > lipschitz) || !(lipschitz >= 0.0) {
        return Err(invalid!("penalty {rho} must exceed the Lipschitz constant {lipschitz}"));
    }
    let h = |x: f64| fprime(x) + shift + rho * (x - anchor);
    let h0 = h(anchor);
    if h0 == 0.0 {
        return Ok(anchor);
    }
    let mut radius = h0.abs() / (rho - lipschitz);
    let dir = if h0 > 0.0 { -1.0 } else { 1.0 };
    let mut far = anchor + dir * radius;
    let mut grow = 0;
    while h(far).signum() == h0.signum() && h(far) != 0.0 {
        // rounding can leave the guaranteed end point on the same side
        radius = radius * 2.0 + f64::EPSILON * (1.0 + anchor.abs());
        far = anchor + dir * radius;
        grow += 1;
        if grow > 64 {
            return Err(invalid!("could not bracket the root; is the Lipschitz constant valid?"));
        }
    }
    let mut last: Option<(f64, f64)> = None;
    let hd = |x: f64| {
        let fp = fprime(x);
        let slope = match last {
            Some((xp, fpp)) if xp != x => rho + (fp - fpp) / (x - xp),
            _ => rho,
        };
        last = Some((x, fp));
        (fp + shift + rho * (x - anchor), slope)
    };
    Ok(safeguarded_root(hd, anchor.min(far), anchor.max(far), warm))
}

/// Global minimization of a one-dimensional subproblem over the pieces of its set.
fn scalar_exact(spec: &SubproblemSpec<'_>, policy: &SolverPolicy) -> Result<BlockSolution> {
    if spec.dim() != 1 {
        return Err(Error::Unsupported("scalar path needs a one-dimensional block".to_string()));
    }
    let pieces = spec
        .set
        .pieces_1d()
        .ok_or_else(|| Error::Unsupported("scalar path needs a special-form set".to_string()))?;
    let p = spec.penalty_matrix[(0, 0)];
    let curvature_bound = spec.objective.lipschitz_1d();
    let strongly_convex = curvature_bound.is_some_and(|l| p > l);
    let warm = spec.warm_start[0];
    let dphi = |v: f64| spec.derivative_1d(v);
    let hd = |v: f64| (spec.derivative_1d(v), spec.second_derivative_1d(v));

    let mut heuristic = false;
    let mut candidates: Vec<f64> = Vec::new();
    let mut evaluations = 0usize;
    for &(lo, hi) in &pieces {
        let anchor = warm.max(lo).min(hi);
        let (a, b) = if lo.is_finite() && hi.is_finite() {
            (lo, hi)
        } else if let (true, Some(l)) = (strongly_convex, curvature_bound) {
            let radius = dphi(anchor).abs() / (p - l) * (1.0 + 1e-9) + 1e-12 * (1.0 + anchor.abs());
            ((anchor - radius).max(lo), (anchor + radius).min(hi))
        } else {
            heuristic = true;
            let w = HEURISTIC_WINDOW * anchor.abs().max(1.0);
            ((anchor - w).max(lo), (anchor + w).min(hi))
        };
        for end in [lo, hi] {
            if end.is_finite() {
                candidates.push(end);
            }
        }
        if heuristic {
            candidates.push(a);
            candidates.push(b);
        }
        if a == b {
            candidates.push(a);
            continue;
        }
        if strongly_convex {
            let (da, db) = (dphi(a), dphi(b));
            evaluations += 2;
            if da <= 0.0 && db >= 0.0 {
                candidates.push(safeguarded_root(hd, a, b, anchor));
            }
            continue;
        }
        let m = policy.grid_points_per_dim;
        let mut prev = (a, dphi(a));
        if prev.1.abs() <= DERIVATIVE_TOL {
            candidates.push(a);
        }
        for i in 1..m {
            let t = if i == m - 1 { b } else { a + (b - a) * i as f64 / (m - 1) as f64 };
            let dt = dphi(t);
            if dt.abs() <= DERIVATIVE_TOL {
                candidates.push(t);
            } else if prev.1.abs() > DERIVATIVE_TOL && prev.1.signum() != dt.signum() {
                candidates.push(safeguarded_root(hd, prev.0, t, 0.5 * (prev.0 + t)));
            }
            prev = (t, dt);
        }
        evaluations += m;
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let mut best = (f64::INFINITY, warm);
    for &c in &candidates {
        let value = spec.value(&[c]);
        if value < best.0 {
            best = (value, c);
        }
    }
    if !best.0.is_finite() {
        return Err(invalid!("scalar subproblem has no finite candidate"));
    }
    Ok(BlockSolution {
        minimizer: Vector::from_element(1, best.1),
        value: best.0,
        status: if heuristic { SolveStatus::Local } else { SolveStatus::Global },
        iterations: evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    fn scalar(v: f64) -> Vector {
        Vector::from_element(1, v)
    }

    #[test]
    fn counterexample_x_update() {
        let p = instances::interval_union_counterexample();
        let spec = SubproblemSpec::x_update(&p, &scalar(0.0), &scalar(0.0), 1.0, scalar(0.0)).unwrap();
        let sol = solve_block(&spec, &SolverPolicy::new(Strategy::ScalarExact)).unwrap();
        assert!((sol.minimizer[0] + 1.0 / 30.0).abs() < 1e-13);
        assert_eq!(sol.status, SolveStatus::Global);
        let grid = solve_block(&spec, &SolverPolicy::new(Strategy::GridGlobal)).unwrap();
        assert!((grid.minimizer[0] + 1.0 / 30.0).abs() < 1e-9);
        assert_eq!(grid.status, SolveStatus::GlobalGrid);
    }

    #[test]
    fn projection_of_unconstrained_minimum() {
        let obj = ObjectiveBlock::square();
        let set = ConstraintSet::boxed(scalar(1.0), scalar(2.0)).unwrap();
        let spec = SubproblemSpec::new(&obj, scalar(0.0), Matrix::zeros(1, 1), &set, scalar(1.7)).unwrap();
        for strategy in [Strategy::Auto, Strategy::ProjectedGradient, Strategy::GridGlobal, Strategy::ScalarExact] {
            let sol = solve_block(&spec, &SolverPolicy::new(strategy)).unwrap();
            assert!((sol.minimizer[0] - 1.0).abs() < 1e-12, "{strategy:?}: {sol:?}");
        }
    }

    #[test]
    fn zero_objective_closed_form() {
        // z = (BᵀB)⁻¹Bᵀ(c - Ax - y/ρ) for g = 0 on the whole space
        let p = instances::huber_consensus(3, 2, 0.1);
        let x = Vector::from_column_slice(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let y = Vector::zeros(6);
        let spec = SubproblemSpec::z_update(&p, &x, &y, 5.0, Vector::zeros(2)).unwrap();
        let sol = solve_block(&spec, &SolverPolicy::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Global);
        assert!((sol.minimizer[0] - 3.0).abs() < 1e-12);
        assert!((sol.minimizer[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn strongly_convex_scalar_roots() {
        let r = scalar_strongly_convex_solve(|_| 0.0, 0.0, 0.7, 2.0, 1.5, 0.0).unwrap();
        assert!((r - (1.5 - 0.35)).abs() < 1e-15);
        let r = scalar_strongly_convex_solve(|x| -libm::sin(x), 1.0, 1.0, 2.0, 0.0, 0.0).unwrap();
        assert!((-libm::sin(r) + 1.0 + 2.0 * r).abs() <= 1e-12);
        assert!((r + 0.8878622115708661).abs() < 1e-12);
        let r = scalar_strongly_convex_solve(|x| libm::cos(x), 1.0, -libm::cos(0.3), 4.0, 0.3, 0.0).unwrap();
        assert_eq!(r, 0.3);
        assert!(scalar_strongly_convex_solve(|x| -libm::sin(x), 1.0, 1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn grid_rejects_high_dimension() {
        let obj = ObjectiveBlock::zero(4).unwrap();
        let set = ConstraintSet::boxed(Vector::zeros(4), Vector::from_element(4, 1.0)).unwrap();
        let spec = SubproblemSpec::new(&obj, Vector::zeros(4), Matrix::zeros(4, 4), &set, Vector::zeros(4)).unwrap();
        assert!(solve_block(&spec, &SolverPolicy::new(Strategy::GridGlobal)).is_err());
    }

    #[test]
    fn nonconvex_scalar_picks_lowest_piece() {
        // -v² on [-1, 0] ∪ [1, 2] with a small tilt towards the right piece
        let obj = ObjectiveBlock::negative_square();
        let set = ConstraintSet::interval_union(vec![(-1.0, 0.0), (1.0, 2.0)]).unwrap();
        let spec = SubproblemSpec::new(&obj, scalar(-0.1), Matrix::zeros(1, 1), &set, scalar(-0.5)).unwrap();
        let sol = solve_block(&spec, &SolverPolicy::new(Strategy::ScalarExact)).unwrap();
        assert_eq!(sol.minimizer[0], 2.0);
        let pg = solve_block(&spec, &SolverPolicy::new(Strategy::ProjectedGradient)).unwrap();
        assert!(pg.value <= spec.value(&[-0.5]));
    }

    #[test]
    fn ties_break_to_smaller_coordinate() {
        // v² on [-1, 1] shifted: minima at ±1 for -v², equal values
        let obj = ObjectiveBlock::negative_square();
        let set = ConstraintSet::boxed(scalar(-1.0), scalar(1.0)).unwrap();
        let spec = SubproblemSpec::new(&obj, scalar(0.0), Matrix::zeros(1, 1), &set, scalar(0.3)).unwrap();
        let exact = solve_block(&spec, &SolverPolicy::new(Strategy::ScalarExact)).unwrap();
        let grid = solve_block(&spec, &SolverPolicy::new(Strategy::GridGlobal)).unwrap();
        assert_eq!(exact.minimizer[0], -1.0);
        assert_eq!(grid.minimizer[0], -1.0);
    }
}
