//! Fixed-point prediction for scalar consensus ADMM.
//!
//! For `min f(x) + g(z)  s.t.  x - z = 0` with `L`-Lipschitz derivatives,
//! `ρ > L` and `y(0) = g'(z(0))`, the iterates move monotonically from `z(0)`
//! in the descent direction of `f + g` and stop at the first stationary point
//! they meet, or diverge if there is none.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::algorithms::{run_admm, InitialPoint, IterationTrace, StopRule, Verdict};
use crate::error::{invalid, Result};
use crate::instances::scalar_consensus;
use crate::linalg::Vector;
use crate::problem::ObjectiveBlock;
use crate::sampling::{stream, stream_rng};
use crate::subsolvers::{SolverPolicy, Strategy};

pub const DEFAULT_SCAN_BOUND: f64 = 1e3;
pub const DEFAULT_SCAN_STEP: f64 = 1e-3;
/// `|s(z)|` at or below this counts as a zero of `s = f' + g'`.
pub const ZERO_TOL: f64 = 1e-12;
/// Agreement tolerance between a run's limit and the predicted one.
pub const AGREEMENT_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarInstance {
    f: ObjectiveBlock,
    g: ObjectiveBlock,
    lipschitz: f64,
    z0: f64,
    rho: f64,
}

impl ScalarInstance {
    /// Both blocks must be one-dimensional with a known derivative Lipschitz
    /// constant; the common constant is the larger of the two.
    pub fn new(f: ObjectiveBlock, g: ObjectiveBlock, z0: f64, rho: f64) -> Result<Self> {
        let lf = f
            .lipschitz_1d()
            .ok_or_else(|| invalid!("f must be a 1-D block with Lipschitz derivative"))?;
        let lg = g
            .lipschitz_1d()
            .ok_or_else(|| invalid!("g must be a 1-D block with Lipschitz derivative"))?;
        let lipschitz = lf.max(lg);
        if !z0.is_finite() {
            return Err(invalid!("z0 must be finite, got {z0}"));
        }
        if !(rho > lipschitz) || !rho.is_finite() {
            return Err(invalid!("rho must exceed the Lipschitz constant {lipschitz}, got {rho}"));
        }
        Ok(Self { f, g, lipschitz, z0, rho })
    }

    pub fn f(&self) -> &ObjectiveBlock {
        &self.f
    }

    pub fn g(&self) -> &ObjectiveBlock {
        &self.g
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `y(0) = g'(z(0))`.
    pub fn y0(&self) -> f64 {
        self.g.derivative_1d(self.z0)
    }

    /// `s(z) = f'(z) + g'(z)`.
    pub fn stationarity(&self, z: f64) -> f64 {
        self.f.derivative_1d(z) + self.g.derivative_1d(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointCase {
    /// `z(0)` is already stationary.
    Stationary,
    /// `s(z(0)) < 0`: iterates increase.
    Rightward,
    /// `s(z(0)) > 0`: iterates decrease.
    Leftward,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limit {
    Finite(f64),
    PlusInfinity,
    MinusInfinity,
}

impl Limit {
    pub fn finite(self) -> Option<f64> {
        match self {
            Limit::Finite(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointPrediction {
    pub case: FixedPointCase,
    pub zstar: Limit,
    /// `f'(z*) + g'(z*)` for a finite limit.
    pub certificate: Option<f64>,
}

pub fn predict_fixed_point(
    inst: &ScalarInstance,
    scan_bound: f64,
    scan_step: f64,
) -> Result<FixedPointPrediction> {
    let z0 = inst.z0;
    if !(scan_bound > z0.abs()) || !scan_bound.is_finite() {
        return Err(invalid!("scan_bound must exceed |z0| = {}, got {scan_bound}", z0.abs()));
    }
    if !(scan_step > 0.0) || !scan_step.is_finite() {
        return Err(invalid!("scan_step must be positive, got {scan_step}"));
    }
    let s0 = inst.stationarity(z0);
    if s0.abs() <= ZERO_TOL {
        return Ok(FixedPointPrediction {
            case: FixedPointCase::Stationary,
            zstar: Limit::Finite(z0),
            certificate: Some(s0),
        });
    }
    let (case, dir) = if s0 < 0.0 {
        (FixedPointCase::Rightward, 1.0)
    } else {
        (FixedPointCase::Leftward, -1.0)
    };
    let steps = libm::ceil(scan_bound / scan_step) as u64;
    let mut prev = z0;
    for k in 1..=steps {
        let z = z0 + dir * scan_step * k as f64;
        let s = inst.stationarity(z);
        let zstar = if s.abs() <= ZERO_TOL {
            Some(z)
        } else if s.signum() != s0.signum() {
            Some(bisect(inst, prev, z))
        } else {
            None
        };
        if let Some(zstar) = zstar {
            return Ok(FixedPointPrediction {
                case,
                zstar: Limit::Finite(zstar),
                certificate: Some(inst.stationarity(zstar)),
            });
        }
        prev = z;
    }
    let zstar = if dir > 0.0 { Limit::PlusInfinity } else { Limit::MinusInfinity };
    Ok(FixedPointPrediction { case, zstar, certificate: None })
}

/// Bisection for a sign change of `s` on the segment between `a` and `b`.
fn bisect(inst: &ScalarInstance, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = if a < b { (a, b) } else { (b, a) };
    let s_lo = inst.stationarity(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= ZERO_TOL || mid <= lo || mid >= hi {
            break;
        }
        let s = inst.stationarity(mid);
        if s == 0.0 {
            return mid;
        }
        if s.signum() == s_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (s_lo, s_hi) = (inst.stationarity(lo), inst.stationarity(hi));
    if s_lo.abs() <= s_hi.abs() {
        lo
    } else {
        hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport {
    pub agreed: bool,
    pub verdict: Verdict,
    pub iterations: usize,
    pub z_final: f64,
    pub y_final: f64,
    /// `max_t |y(t) - g'(z(t))|` over the recorded run.
    pub dual_gradient_gap: f64,
    /// Steps that move against the predicted direction or overshoot a finite limit.
    pub monotonicity_violations: usize,
    pub detail: String,
    pub trace: IterationTrace,
}

/// Runs scalar ADMM with exact subsolves from `(z(0), g'(z(0)))` and compares
/// its outcome with `pred`. Disagreement is reported, not returned as an error.
pub fn verify_prediction(
    inst: &ScalarInstance,
    pred: &FixedPointPrediction,
    stop: &StopRule,
) -> Result<AgreementReport> {
    let p = scalar_consensus(inst.f.clone(), inst.g.clone());
    let init = InitialPoint::new(Vector::from_element(1, inst.z0), Vector::from_element(1, inst.y0()));
    let policy = SolverPolicy::new(Strategy::ScalarExact);
    let trace = run_admm(&p, inst.rho, &init, &policy, stop)?;
    let last = trace.last();
    let (z_final, y_final) = (last.z[0], last.y[0]);
    let dual_gradient_gap = trace
        .records
        .iter()
        .map(|r| (r.y[0] - inst.g.derivative_1d(r.z[0])).abs())
        .fold(0.0, f64::max);
    let zs: Vec<f64> = trace.records.iter().map(|r| r.z[0]).collect();
    let monotonicity_violations = count_monotonicity_violations(&zs, pred);
    let (agreed, detail) = match pred.zstar {
        Limit::Finite(zstar) => {
            let dz = (z_final - zstar).abs();
            let dy = (y_final - inst.g.derivative_1d(zstar)).abs();
            let ok = trace.verdict == Verdict::Converged && dz <= AGREEMENT_TOL && dy <= AGREEMENT_TOL;
            (ok, alloc::format!("verdict {:?}, |z - z*| = {dz:.3e}, |y - g'(z*)| = {dy:.3e}", trace.verdict))
        }
        Limit::PlusInfinity | Limit::MinusInfinity => {
            let want = if pred.zstar == Limit::PlusInfinity { 1.0 } else { -1.0 };
            let ok = trace.verdict == Verdict::Diverged && z_final.signum() == want;
            (ok, alloc::format!("verdict {:?}, z_final = {z_final:.6e}", trace.verdict))
        }
    };
    Ok(AgreementReport {
        agreed,
        verdict: trace.verdict,
        iterations: trace.iterations(),
        z_final,
        y_final,
        dual_gradient_gap,
        monotonicity_violations,
        detail,
        trace,
    })
}

/// Increments must follow the predicted direction and never cross a finite
/// limit. Once an iterate sits at the limit (to 1e-10) it may stop moving.
fn count_monotonicity_violations(zs: &[f64], pred: &FixedPointPrediction) -> usize {
    let dir = match pred.case {
        FixedPointCase::Stationary => return zs.iter().filter(|z| (**z - zs[0]).abs() > 1e-12).count(),
        FixedPointCase::Rightward => 1.0,
        FixedPointCase::Leftward => -1.0,
    };
    let zstar = pred.zstar.finite();
    let settled = |z: f64| zstar.is_some_and(|s| (z - s).abs() <= 1e-10);
    zs.windows(2)
        .filter(|w| {
            let step = dir * (w[1] - w[0]);
            let crossed = zstar.is_some_and(|s| dir * (w[1] - s) > 1e-10);
            crossed || step < 0.0 || (step == 0.0 && !settled(w[0]))
        })
        .count()
}

/// One-dimensional blocks with analytic derivative Lipschitz constants.
pub fn builtin_scalar_blocks() -> Vec<(&'static str, ObjectiveBlock)> {
    alloc::vec![
        ("cos", ObjectiveBlock::cosine(1.0, 0.0)),
        ("sin", ObjectiveBlock::sine()),
        ("neg-square", ObjectiveBlock::negative_square()),
        ("square", ObjectiveBlock::square()),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryEntry {
    pub f: &'static str,
    pub g: &'static str,
    pub z0: f64,
    pub rho: f64,
    pub prediction: FixedPointPrediction,
    pub agreed: bool,
    pub monotonicity_violations: usize,
    pub dual_gradient_gap: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryReport {
    pub entries: Vec<BatteryEntry>,
}

impl BatteryReport {
    pub fn agreements(&self) -> usize {
        self.entries.iter().filter(|e| e.agreed).count()
    }

    pub fn discrepancies(&self) -> Vec<&BatteryEntry> {
        self.entries.iter().filter(|e| !e.agreed).collect()
    }
}

/// Random builtin pairs with `z(0) ∈ [-10, 10]` and `ρ = 2L`.
pub fn battery(count: usize, seed: u64, stop: &StopRule) -> Result<BatteryReport> {
    let blocks = builtin_scalar_blocks();
    let mut rng = stream_rng(seed, stream::BATTERY);
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let (fname, f) = &blocks[rng.random_range(0..blocks.len())];
        let (gname, g) = &blocks[rng.random_range(0..blocks.len())];
        let z0 = rng.random_range(-10.0..=10.0);
        let lipschitz = f.lipschitz_1d().unwrap_or(0.0).max(g.lipschitz_1d().unwrap_or(0.0));
        let inst = ScalarInstance::new(f.clone(), g.clone(), z0, 2.0 * lipschitz)?;
        let prediction = predict_fixed_point(&inst, DEFAULT_SCAN_BOUND, DEFAULT_SCAN_STEP)?;
        let report = verify_prediction(&inst, &prediction, stop)?;
        entries.push(BatteryEntry {
            f: fname,
            g: gname,
            z0,
            rho: inst.rho,
            prediction,
            agreed: report.agreed,
            monotonicity_violations: report.monotonicity_violations,
            dual_gradient_gap: report.dual_gradient_gap,
            detail: report.detail,
        });
    }
    Ok(BatteryReport { entries })
}
