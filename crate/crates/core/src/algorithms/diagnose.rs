use super::runner::has_unconstrained_structure;
use super::trace::{DualPolicy, IterationTrace, Method, Verdict};
use crate::error::Result;
use crate::linalg::{spectral_norm, Matrix};
use crate::problem::{FonCertificate, PrimalDualPoint, StructuredProblem};

/// Number of trailing records inspected for multiplier convergence.
pub const DUAL_WINDOW: usize = 20;

/// Per-iteration check of `r(t+1) <= (M/ρ(t))(1 + ‖B(BᵀB)⁻¹Bᵀ‖)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualBoundReport {
    pub checked: usize,
    pub satisfied: usize,
    /// Largest observed gradient norm `M` over the recorded iterates.
    pub max_gradient: f64,
    pub projector_norm: f64,
    /// Largest ratio `r / bound` over the checked records.
    pub worst_ratio: f64,
}

impl ResidualBoundReport {
    pub fn ratio(&self) -> f64 {
        if self.checked == 0 {
            1.0
        } else {
            self.satisfied as f64 / self.checked as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceDiagnosis {
    pub dual_converged: bool,
    /// Records inspected by the tail test.
    pub window: usize,
    pub max_tail_dual_step: f64,
    pub fon: Option<FonCertificate>,
    /// The certificate recovered the coupling multiplier instead of using `y`.
    pub fon_recovered_dual: bool,
    pub residual_bound: Option<ResidualBoundReport>,
}

fn projector_norm(b: &Matrix) -> f64 {
    let btb = b.transpose() * b;
    match btb.try_inverse() {
        Some(inv) => spectral_norm(&(b * inv * b.transpose())),
        None => f64::INFINITY,
    }
}

fn residual_bound(trace: &IterationTrace, p: &StructuredProblem) -> ResidualBoundReport {
    let projector_norm = projector_norm(p.b());
    let max_gradient = trace.records[1..]
        .iter()
        .map(|r| p.f().gradient(r.x.as_slice()).norm())
        .fold(0.0, f64::max);
    let mut report = ResidualBoundReport {
        checked: 0,
        satisfied: 0,
        max_gradient,
        projector_norm,
        worst_ratio: 0.0,
    };
    for rec in &trace.records[1..] {
        let bound = max_gradient / rec.rho * (1.0 + projector_norm);
        report.checked += 1;
        if rec.primal_residual <= bound * (1.0 + 1e-6) + 1e-12 {
            report.satisfied += 1;
        }
        if bound > 0.0 {
            report.worst_ratio = report.worst_ratio.max(rec.primal_residual / bound);
        }
    }
    report
}

/// Tail test of the multipliers and, when they settled, a FON certificate at the last iterate.
///
/// Runs whose multiplier is zero or held fixed are certified with a
/// recovered coupling multiplier.
pub fn diagnose_trace(trace: &IterationTrace, p: &StructuredProblem, tol: f64) -> Result<TraceDiagnosis> {
    let fixed_dual = matches!(trace.dual, None | Some(DualPolicy::Zero));
    let tail = &trace.records[1..];
    let window = tail.len().min(DUAL_WINDOW);
    let max_tail_dual_step = tail[tail.len() - window..]
        .iter()
        .map(|r| r.dual_step_norm)
        .fold(0.0, f64::max);
    let dual_converged = trace.verdict != Verdict::Diverged && window > 0 && (fixed_dual || max_tail_dual_step <= tol);
    let last = trace.last();
    let fon = if dual_converged {
        Some(if fixed_dual {
            p.check_fon_recovering_dual(&last.x, &last.z, tol)?
        } else {
            p.check_fon(&PrimalDualPoint::new(last.x.clone(), last.z.clone(), last.y.clone(), last.rho), tol)?
        })
    } else {
        None
    };
    let applies = trace.method == Method::Adpm
        && trace.dual == Some(DualPolicy::Zero)
        && !tail.is_empty()
        && has_unconstrained_structure(p);
    Ok(TraceDiagnosis {
        dual_converged,
        window,
        max_tail_dual_step,
        fon,
        fon_recovered_dual: dual_converged && fixed_dual,
        residual_bound: applies.then(|| residual_bound(trace, p)),
    })
}
