//! JSON run summaries.

use std::path::Path;

use adlm_core::algorithms::{IterationTrace, Method, TraceDiagnosis, Verdict};
use adlm_core::problem::FonCertificate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Converged => "converged",
        Verdict::MaxIters => "max-iters",
        Verdict::Diverged => "diverged",
    }
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::Adpm => "adpm",
        Method::Admm => "admm",
        Method::QuadraticPenalty => "qpm",
        Method::MethodOfMultipliers => "mm",
        Method::DistributedAdlm => "d-adlm",
        Method::DistributedGradient => "d-gd",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FonSummary {
    pub passed: bool,
    pub tol: f64,
    pub primal_residual: f64,
    pub set_violation: f64,
    pub dual_feasibility_violation: f64,
    pub complementary_slackness_violation: f64,
    pub stationarity_residual_x: f64,
    pub stationarity_residual_z: f64,
    pub regularity_violated: bool,
    pub coupling_multiplier_recovered: bool,
    pub coupling_multiplier: Vec<f64>,
}

impl From<&FonCertificate> for FonSummary {
    fn from(c: &FonCertificate) -> Self {
        Self {
            passed: c.passed,
            tol: c.tol,
            primal_residual: c.primal_residual,
            set_violation: c.set_violation,
            dual_feasibility_violation: c.dual_feasibility_violation,
            complementary_slackness_violation: c.complementary_slackness_violation,
            stationarity_residual_x: c.stationarity_residual_x,
            stationarity_residual_z: c.stationarity_residual_z,
            regularity_violated: c.regularity_violated,
            coupling_multiplier_recovered: c.coupling_multiplier_recovered,
            coupling_multiplier: c.coupling_multiplier.iter().copied().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualBoundSummary {
    pub checked: usize,
    pub satisfied: usize,
    pub max_gradient: f64,
    pub projector_norm: f64,
    pub worst_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub method: String,
    pub verdict: String,
    pub iterations: usize,
    pub final_r: f64,
    pub final_objective: f64,
    pub final_stationarity: f64,
    pub final_rho: f64,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub y: Vec<f64>,
    pub dual_converged: bool,
    pub max_tail_dual_step: f64,
    /// Certificate of the run, or of the diagnosis when the run attached none.
    pub fon: Option<FonSummary>,
    pub residual_bound: Option<ResidualBoundSummary>,
}

impl SolveSummary {
    pub fn new(trace: &IterationTrace, diag: &TraceDiagnosis) -> Self {
        let last = trace.last();
        let fon = trace.fon.as_ref().or(diag.fon.as_ref()).map(FonSummary::from);
        Self {
            method: method_name(trace.method).into(),
            verdict: verdict_name(trace.verdict).into(),
            iterations: trace.iterations(),
            final_r: last.primal_residual,
            final_objective: last.objective,
            final_stationarity: last.stationarity_norm,
            final_rho: last.rho,
            x: last.x.iter().copied().collect(),
            z: last.z.iter().copied().collect(),
            y: last.y.iter().copied().collect(),
            dual_converged: diag.dual_converged,
            max_tail_dual_step: diag.max_tail_dual_step,
            fon,
            residual_bound: diag.residual_bound.as_ref().map(|b| ResidualBoundSummary {
                checked: b.checked,
                satisfied: b.satisfied,
                max_gradient: b.max_gradient,
                projector_norm: b.projector_norm,
                worst_ratio: b.worst_ratio,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationSummary {
    pub algo: String,
    pub verdict: String,
    pub iterations: usize,
    pub final_r: f64,
    pub final_max_node_residual: f64,
    pub final_consensus_gradient: f64,
    pub rmse: f64,
    pub node_failures: usize,
    pub fon: Option<FonSummary>,
    pub trace_file: String,
    pub estimates_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizeSummary {
    pub network_file: String,
    pub sensors: usize,
    pub anchors: usize,
    pub edges: usize,
    pub sigma2: f64,
    pub seed: u64,
    pub isolated_sensors: Vec<usize>,
    pub runs: Vec<LocalizationSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatesFile {
    pub algo: String,
    pub rmse: f64,
    pub estimates: Vec<[f64; 2]>,
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| Error::Json { path: path.into(), source })?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })
}
