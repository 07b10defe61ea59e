//! The `adlm` command line.
//!
//! Exit codes: 0 converged / completed / agreed, 1 usage or input error,
//! 2 iteration limit, 3 diverged, 4 disconnected network, 5 oracle
//! disagreement, 6 replay mismatch.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use adlm_core::algorithms::{
    diagnose_trace, run_adpm, run_admm, run_method_of_multipliers, run_quadratic_penalty, DualPolicy, InitialPoint,
    IterationTrace, PenaltySchedule, StopRule, Verdict,
};
use adlm_core::localization::{
    generate_network, run_dadlm, run_dgd, AnchorLayout, LocalizationAlgo, LocalizationRunConfig, NodeExecutor,
    Sequential, SensorNetwork, ZUpdateRule, TABLE_NAMES,
};
use adlm_core::oracle::{
    predict_fixed_point, verify_prediction, AgreementReport, FixedPointCase, FixedPointPrediction, Limit,
    ScalarInstance, DEFAULT_SCAN_BOUND, DEFAULT_SCAN_STEP,
};
use adlm_core::problem::ObjectiveBlock;
use adlm_core::subsolvers::{SolverPolicy, Strategy};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::executor::Parallel;
use crate::manifest::{ReplayReport, RunManifest};
use crate::network_file::{read_network, write_network};
use crate::problem_file::read_problem;
use crate::summary::{verdict_name, write_json, EstimatesFile, FonSummary, LocalizationSummary, LocalizeSummary, SolveSummary};
use crate::trace_csv::write_trace_file;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MAX_ITERS: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_DISCONNECTED: i32 = 4;
pub const EXIT_DISAGREEMENT: i32 = 5;
pub const EXIT_REPLAY_MISMATCH: i32 = 6;

/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "ADLM_SEED";

#[derive(Debug, Parser)]
#[command(name = "adlm", version, about = "Alternating direction Lagrangian methods")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a solver on a JSON problem spec.
    Solve(SolveArgs),
    /// Generate a sensor network and run the localization settings on it.
    Localize(LocalizeArgs),
    /// Predict the limit of scalar ADMM and optionally verify it.
    Oracle(OracleArgs),
    /// Re-run a manifest into a fresh directory and compare outputs.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveAlgo {
    Adpm,
    Admm,
    /// Quadratic penalty method with a joint update.
    Qpm,
    /// Method of multipliers with a joint update.
    Mm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyArg {
    Auto,
    ClosedForm,
    ProjectedGradient,
    GridGlobal,
    ScalarExact,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Auto => Strategy::Auto,
            StrategyArg::ClosedForm => Strategy::ClosedForm,
            StrategyArg::ProjectedGradient => Strategy::ProjectedGradient,
            StrategyArg::GridGlobal => Strategy::GridGlobal,
            StrategyArg::ScalarExact => Strategy::ScalarExact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long, value_enum)]
    pub algo: SolveAlgo,
    /// Fixed penalty for admm and mm.
    #[arg(long)]
    pub rho: Option<f64>,
    /// `constant:R`, `linear:R0,SLOPE` or `geometric:R0,DELTA,KAPPA`.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Multiplier policy of adpm: `zero`, `recursion` or `bounded:RADIUS`.
    #[arg(long, default_value = "zero")]
    pub dual: String,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    /// Primal residual tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Step tolerance; defaults to `--tol`.
    #[arg(long)]
    pub step_tol: Option<f64>,
    #[arg(long, default_value_t = 1e6)]
    pub divergence_bound: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub fon_tol: f64,
    #[arg(long, value_enum, default_value = "auto")]
    pub strategy: StrategyArg,
    #[arg(long)]
    pub inner_tol: Option<f64>,
    #[arg(long, default_value_t = 1001)]
    pub grid_points: usize,
    #[arg(long, default_value_t = 1)]
    pub multistart: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub summary: PathBuf,
    /// Defaults to the summary path with extension `manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZUpdateArg {
    Exact,
    Literal,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LocalizeArgs {
    #[arg(long, default_value_t = 10)]
    pub sensors: usize,
    /// `corner4` or explicit positions `x,y;x,y;...`.
    #[arg(long, default_value = "corner4")]
    pub anchors: String,
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    #[arg(long, default_value_t = 0.05)]
    pub noise_factor: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// A setting name, a comma-separated list, or `all`.
    #[arg(long, default_value = "all")]
    pub algo: String,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Use a network file instead of generating one.
    #[arg(long)]
    pub network: Option<PathBuf>,
    #[arg(long)]
    pub allow_disconnected: bool,
    #[arg(long, value_enum, default_value = "exact")]
    pub z_update: ZUpdateArg,
    /// Worker threads for node subproblems; 0 picks automatically.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OracleArgs {
    /// `cos[:AMPLITUDE,PHASE]`, `sin`, `negsq`, `square` or `poly:C0,C1,C2`.
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub g: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub z0: f64,
    #[arg(long)]
    pub rho: f64,
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = DEFAULT_SCAN_BOUND)]
    pub scan_bound: f64,
    #[arg(long, default_value_t = DEFAULT_SCAN_STEP)]
    pub scan_step: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn parse_numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| usage(format!("bad number '{v}': {e}"))))
        .collect()
}

pub fn parse_schedule(s: &str) -> Result<PenaltySchedule> {
    let (kind, params) = s.split_once(':').ok_or_else(|| usage(format!("schedule '{s}' needs KIND:PARAMS")))?;
    let p = parse_numbers(params)?;
    let sched = match (kind, p.as_slice()) {
        ("constant", [rho]) => PenaltySchedule::constant(*rho),
        ("linear", [rho0, slope]) => PenaltySchedule::linear(*rho0, *slope),
        ("geometric", [rho0, delta, kappa]) if kappa.fract() == 0.0 && *kappa >= 1.0 => {
            PenaltySchedule::geometric(*rho0, *delta, *kappa as usize)
        }
        _ => return Err(usage(format!("unrecognized schedule '{s}'"))),
    };
    Ok(sched?)
}

pub fn parse_dual(s: &str) -> Result<DualPolicy> {
    match s.split_once(':') {
        None if s == "zero" => Ok(DualPolicy::Zero),
        None if s == "recursion" => Ok(DualPolicy::MultiplierRecursion),
        Some(("bounded", r)) => Ok(DualPolicy::BoundedRecursion {
            radius: r.trim().parse().map_err(|e| usage(format!("bad radius '{r}': {e}")))?,
        }),
        _ => Err(usage(format!("unrecognized dual policy '{s}'"))),
    }
}

/// Scalar block from `kind[:params]`.
pub fn parse_scalar_block(s: &str) -> Result<ObjectiveBlock> {
    let (kind, params) = match s.split_once(':') {
        Some((k, p)) => (k, Some(parse_numbers(p)?)),
        None => (s, None),
    };
    let block = match (kind, params.as_deref()) {
        ("cos", None) => ObjectiveBlock::cosine(1.0, 0.0),
        ("cos", Some([amp, phase])) => ObjectiveBlock::cosine(*amp, *phase),
        ("sin", None) => ObjectiveBlock::sine(),
        ("negsq" | "neg-square", None) => ObjectiveBlock::negative_square(),
        ("square", None) => ObjectiveBlock::square(),
        ("poly", Some(c)) => ObjectiveBlock::polynomial(c.to_vec())?,
        _ => return Err(usage(format!("unrecognized scalar block '{s}'"))),
    };
    Ok(block)
}

pub fn parse_anchors(s: &str) -> Result<AnchorLayout> {
    if s == "corner4" {
        return Ok(AnchorLayout::Corner4);
    }
    let points = s
        .split(';')
        .map(|p| match parse_numbers(p)?.as_slice() {
            [x, y] => Ok([*x, *y]),
            _ => Err(usage(format!("anchor '{p}' needs two coordinates"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AnchorLayout::Explicit(points))
}

/// `ADLM_SEED`, when set, replaces the flag value.
pub fn resolve_seed(flag: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|e| usage(format!("{SEED_ENV}='{v}': {e}"))),
        Err(_) => Ok(flag),
    }
}

fn absolute(p: &Path) -> Result<PathBuf> {
    std::fs::canonicalize(p).map_err(|e| Error::io(p, e))
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Converged => EXIT_OK,
        Verdict::MaxIters => EXIT_MAX_ITERS,
        Verdict::Diverged => EXIT_DIVERGED,
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn manifest_path(args: &SolveArgs) -> PathBuf {
    args.manifest.clone().unwrap_or_else(|| args.summary.with_extension("manifest.json"))
}

/// Runs `solve` with the arguments as given (no environment lookups).
pub fn solve(args: &SolveArgs) -> Result<IterationTrace> {
    let loaded = read_problem(&args.problem)?;
    let p = &loaded.problem;
    let mut init = InitialPoint::new(loaded.z0.clone(), loaded.y0.clone());
    init.x0 = loaded.x0.clone();
    let mut policy = SolverPolicy::new(args.strategy.into())
        .with_grid_points(args.grid_points)
        .with_multistart(args.multistart, args.seed);
    if let Some(t) = args.inner_tol {
        policy = policy.with_tol(t);
    }
    let stop = StopRule {
        max_iters: args.max_iter,
        primal_tol: args.tol,
        step_tol: args.step_tol.unwrap_or(args.tol),
        divergence_bound: args.divergence_bound,
        fon_tol: args.fon_tol,
    };
    let schedule = || -> Result<PenaltySchedule> {
        let s = args.schedule.as_deref().ok_or_else(|| usage("--schedule is required for this algorithm"))?;
        parse_schedule(s)
    };
    let fixed_rho = || -> Result<f64> {
        if let Some(rho) = args.rho {
            return Ok(rho);
        }
        match args.schedule.as_deref().map(parse_schedule).transpose()? {
            Some(s) if s.is_constant() => Ok(s.rho(0)),
            _ => Err(usage("--rho (or a constant schedule) is required for this algorithm")),
        }
    };
    let trace = match args.algo {
        SolveAlgo::Adpm => run_adpm(p, &schedule()?, parse_dual(&args.dual)?, &init, &policy, &stop)?,
        SolveAlgo::Qpm => run_quadratic_penalty(p, &schedule()?, &init, &policy, &stop)?,
        SolveAlgo::Admm => run_admm(p, fixed_rho()?, &init, &policy, &stop)?,
        SolveAlgo::Mm => run_method_of_multipliers(p, fixed_rho()?, &init, &policy, &stop)?,
    };
    let diag = diagnose_trace(&trace, p, args.fon_tol)?;
    write_trace_file(&args.trace, &trace, None)?;
    write_json(&args.summary, &SolveSummary::new(&trace, &diag))?;
    let manifest = RunManifest::new(
        "solve",
        args,
        args.seed,
        std::slice::from_ref(&args.problem),
        &[args.trace.clone(), args.summary.clone()],
    )?;
    manifest.write(&manifest_path(args))?;
    Ok(trace)
}

pub fn table_settings(spec: &str) -> Result<Vec<String>> {
    let names: Vec<String> = if spec == "all" {
        TABLE_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        spec.split(',').map(|s| s.trim().to_string()).collect()
    };
    for n in &names {
        LocalizationAlgo::from_table_name(n)?;
    }
    Ok(names)
}

pub fn localize_with<E: NodeExecutor>(args: &LocalizeArgs, exec: &E) -> Result<LocalizeSummary> {
    let names = table_settings(&args.algo)?;
    let net = match &args.network {
        Some(p) => read_network(p)?,
        None => generate_network(args.sensors, &parse_anchors(&args.anchors)?, args.radius, args.noise_factor, args.seed)?,
    };
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    let network_path = args.out_dir.join("network.json");
    write_network(&network_path, &net)?;
    if net.is_flagged() && !args.allow_disconnected {
        return Err(adlm_core::Error::DisconnectedNetwork(format!(
            "sensors without measurements: {:?}",
            net.isolated_sensors()
        ))
        .into());
    }
    let mut outputs = vec![network_path];
    let mut runs = Vec::new();
    for name in &names {
        let (run, summary) = localize_one(&net, name, args, exec)?;
        let trace_path = args.out_dir.join(&summary.trace_file);
        let estimates_path = args.out_dir.join(&summary.estimates_file);
        write_trace_file(&trace_path, &run.trace, Some(&run.extras))?;
        write_json(
            &estimates_path,
            &EstimatesFile {
                algo: name.clone(),
                rmse: summary.rmse,
                estimates: run.estimates.clone(),
            },
        )?;
        outputs.extend([trace_path, estimates_path]);
        runs.push(summary);
    }
    let summary = LocalizeSummary {
        network_file: "network.json".into(),
        sensors: net.sensor_count(),
        anchors: net.anchors().len(),
        edges: net.edges().len(),
        sigma2: net.noise_sigma2(),
        seed: net.seed(),
        isolated_sensors: net.isolated_sensors().to_vec(),
        runs,
    };
    let summary_path = args.out_dir.join("summary.json");
    write_json(&summary_path, &summary)?;
    outputs.push(summary_path);
    let inputs: Vec<PathBuf> = args.network.iter().cloned().collect();
    RunManifest::new("localize", args, args.seed, &inputs, &outputs)?.write(&args.out_dir.join("manifest.json"))?;
    Ok(summary)
}

fn localize_one<E: NodeExecutor>(
    net: &SensorNetwork,
    name: &str,
    args: &LocalizeArgs,
    exec: &E,
) -> Result<(adlm_core::localization::LocalizationRun, LocalizationSummary)> {
    let algo = LocalizationAlgo::from_table_name(name)?;
    let is_dgd = matches!(algo, LocalizationAlgo::Dgd { .. });
    let mut cfg = LocalizationRunConfig::new(algo)
        .with_seed(args.seed)
        .with_iterations(args.iters)
        .with_z_update(match args.z_update {
            ZUpdateArg::Exact => ZUpdateRule::ExactMinimizer,
            ZUpdateArg::Literal => ZUpdateRule::LiteralAveraging,
        });
    cfg.allow_flagged = args.allow_disconnected;
    let run = if is_dgd { run_dgd(net, &cfg, exec)? } else { run_dadlm(net, &cfg, exec)? };
    let last = run.trace.last();
    let extra = run.extras.last().expect("extras align with records");
    let summary = LocalizationSummary {
        algo: name.into(),
        verdict: verdict_name(run.trace.verdict).into(),
        iterations: run.trace.iterations(),
        final_r: last.primal_residual,
        final_max_node_residual: extra.max_node_residual,
        final_consensus_gradient: extra.consensus_gradient_norm,
        rmse: extra.rmse,
        node_failures: run.node_failures,
        fon: run.fon.as_ref().map(FonSummary::from),
        trace_file: format!("trace-{name}.csv"),
        estimates_file: format!("estimates-{name}.json"),
    };
    Ok((run, summary))
}

pub fn localize(args: &LocalizeArgs) -> Result<LocalizeSummary> {
    if args.threads == 1 {
        localize_with(args, &Sequential)
    } else {
        localize_with(args, &Parallel::new(args.threads)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleOutput {
    pub f: String,
    pub g: String,
    pub z0: f64,
    pub rho: f64,
    pub lipschitz: f64,
    pub y0: f64,
    pub case: &'static str,
    /// A number, or `"+inf"` / `"-inf"`.
    pub zstar: serde_json::Value,
    pub certificate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationOutput>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationOutput {
    pub agreed: bool,
    pub verdict: &'static str,
    pub iterations: usize,
    pub z_final: f64,
    pub y_final: f64,
    pub dual_gradient_gap: f64,
    pub monotonicity_violations: usize,
    pub detail: String,
}

impl From<&AgreementReport> for VerificationOutput {
    fn from(r: &AgreementReport) -> Self {
        Self {
            agreed: r.agreed,
            verdict: verdict_name(r.verdict),
            iterations: r.iterations,
            z_final: r.z_final,
            y_final: r.y_final,
            dual_gradient_gap: r.dual_gradient_gap,
            monotonicity_violations: r.monotonicity_violations,
            detail: r.detail.clone(),
        }
    }
}

fn limit_json(l: Limit) -> serde_json::Value {
    match l {
        Limit::Finite(z) => serde_json::json!(z),
        Limit::PlusInfinity => serde_json::json!("+inf"),
        Limit::MinusInfinity => serde_json::json!("-inf"),
    }
}

fn case_name(c: FixedPointCase) -> &'static str {
    match c {
        FixedPointCase::Stationary => "stationary",
        FixedPointCase::Rightward => "rightward",
        FixedPointCase::Leftward => "leftward",
    }
}

pub fn oracle(args: &OracleArgs) -> Result<(FixedPointPrediction, Option<AgreementReport>, OracleOutput)> {
    let inst = ScalarInstance::new(parse_scalar_block(&args.f)?, parse_scalar_block(&args.g)?, args.z0, args.rho)?;
    let pred = predict_fixed_point(&inst, args.scan_bound, args.scan_step)?;
    let report = if args.verify {
        let stop = StopRule {
            max_iters: args.max_iter,
            primal_tol: args.tol,
            step_tol: args.tol,
            ..StopRule::default()
        };
        Some(verify_prediction(&inst, &pred, &stop)?)
    } else {
        None
    };
    let out = OracleOutput {
        f: args.f.clone(),
        g: args.g.clone(),
        z0: args.z0,
        rho: args.rho,
        lipschitz: inst.lipschitz(),
        y0: inst.y0(),
        case: case_name(pred.case),
        zstar: limit_json(pred.zstar),
        certificate: pred.certificate,
        verification: report.as_ref().map(VerificationOutput::from),
    };
    Ok((pred, report, out))
}

/// Re-runs the manifest's command with outputs redirected to `out_dir`.
pub fn replay(manifest_file: &Path, out_dir: &Path) -> Result<ReplayReport> {
    let manifest = RunManifest::read(manifest_file)?;
    let bad_config = |e: serde_json::Error| Error::Json { path: manifest_file.into(), source: e };
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    match manifest.command.as_str() {
        "solve" => {
            let mut args: SolveArgs = serde_json::from_value(manifest.config.clone()).map_err(bad_config)?;
            args.manifest = Some(out_dir.join(file_name(&manifest_path(&args))));
            args.trace = out_dir.join(file_name(&args.trace));
            args.summary = out_dir.join(file_name(&args.summary));
            solve(&args)?;
        }
        "localize" => {
            let mut args: LocalizeArgs = serde_json::from_value(manifest.config.clone()).map_err(bad_config)?;
            args.out_dir = out_dir.to_path_buf();
            localize(&args)?;
        }
        other => return Err(usage(format!("manifest has unknown command '{other}'"))),
    }
    ReplayReport::compare(&manifest, out_dir)
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable output"));
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve(mut args) => {
            args.seed = resolve_seed(args.seed)?;
            args.problem = absolute(&args.problem)?;
            let trace = solve(&args)?;
            Ok(verdict_code(trace.verdict))
        }
        Command::Localize(mut args) => {
            args.seed = resolve_seed(args.seed)?;
            if let Some(p) = &args.network {
                args.network = Some(absolute(p)?);
            }
            let summary = localize(&args)?;
            print_json(&summary);
            let diverged = summary.runs.iter().any(|r| r.verdict == verdict_name(Verdict::Diverged));
            Ok(if diverged { EXIT_DIVERGED } else { EXIT_OK })
        }
        Command::Oracle(args) => {
            let (_, report, out) = oracle(&args)?;
            print_json(&out);
            Ok(match report {
                Some(r) if !r.agreed => EXIT_DISAGREEMENT,
                _ => EXIT_OK,
            })
        }
        Command::Replay(args) => {
            let report = replay(&args.manifest, &args.out_dir)?;
            print_json(&report);
            Ok(if report.reproduced() { EXIT_OK } else { EXIT_REPLAY_MISMATCH })
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Core(adlm_core::Error::DisconnectedNetwork(_)) => EXIT_DISCONNECTED,
        _ => EXIT_USAGE,
    }
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
