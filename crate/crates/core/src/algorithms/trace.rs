use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::linalg::Vector;
use crate::problem::FonCertificate;
use crate::subsolvers::SolveStatus;

/// Multiplier handling of the outer loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DualPolicy {
    /// `y(t) = 0` for all `t`.
    Zero,
    /// `y ← y + ρ(Ax + Bz - c)`.
    MultiplierRecursion,
    /// Recursion followed by projection onto the ball of the given radius.
    BoundedRecursion { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub max_iters: usize,
    pub primal_tol: f64,
    pub step_tol: f64,
    /// Iterates with a larger norm end the run as diverged.
    pub divergence_bound: f64,
    /// Tolerance of the certificate attached to converged multiplier runs.
    pub fon_tol: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            primal_tol: 1e-6,
            step_tol: 1e-6,
            divergence_bound: 1e6,
            fon_tol: 1e-6,
        }
    }
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.primal_tol, self.step_tol, self.divergence_bound, self.fon_tol]
            .iter()
            .all(|v| *v > 0.0);
        if self.max_iters == 0 || !all_positive {
            return Err(invalid!("stop rule entries must be positive"));
        }
        Ok(())
    }
}

/// Starting point; `x0` defaults to zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialPoint {
    pub x0: Option<Vector>,
    pub z0: Vector,
    pub y0: Vector,
}

impl InitialPoint {
    pub fn new(z0: Vector, y0: Vector) -> Self {
        Self { x0: None, z0, y0 }
    }

    pub fn with_x0(mut self, x0: Vector) -> Self {
        self.x0 = Some(x0);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Adpm,
    Admm,
    QuadraticPenalty,
    MethodOfMultipliers,
    DistributedAdlm,
    DistributedGradient,
}

/// Which convergence guarantee the configuration falls under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuaranteeRegime {
    /// Unconstrained consensus structure, zero multipliers, divergent penalty with non-summable inverse.
    UnconstrainedPenalty,
    /// Convex compact sets, full-column-rank coupling, geometric penalty growth.
    ConstrainedGeometric,
    /// Fixed penalty with multiplier recursion: limit points satisfy FON when the multipliers converge.
    MultiplierConvergence,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converged,
    Diverged,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    /// Penalty used to produce this record (`ρ(t-1)`; `ρ(0)` at `t = 0`).
    pub rho: f64,
    pub x: Vector,
    pub z: Vector,
    pub y: Vector,
    pub primal_residual: f64,
    /// Norm of the projected Lagrangian gradient at `(x, z, y)`.
    pub stationarity_norm: f64,
    pub objective: f64,
    pub dual_step_norm: f64,
    pub primal_step_norm: f64,
    pub x_status: Option<SolveStatus>,
    pub z_status: Option<SolveStatus>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub method: Method,
    /// `None` when the multiplier is held fixed at its initial value.
    pub dual: Option<DualPolicy>,
    pub regime: GuaranteeRegime,
    /// Record `t` holds the iterate after `t` iterations; record 0 is the start.
    pub records: Vec<IterationRecord>,
    pub verdict: Verdict,
    pub fon: Option<FonCertificate>,
}

impl IterationTrace {
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("trace holds the initial record")
    }
}
