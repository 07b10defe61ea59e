//! Outer loops: the alternating direction penalty method, ADMM, and the
//! joint-update baselines (quadratic penalty, method of multipliers).

mod diagnose;
mod runner;
mod schedule;
mod trace;

pub use diagnose::{diagnose_trace, ResidualBoundReport, TraceDiagnosis, DUAL_WINDOW};
pub use runner::{run_admm, run_adpm, run_method_of_multipliers, run_quadratic_penalty};
pub use schedule::{PenaltySchedule, ScheduleKind};
pub use trace::{
    DualPolicy, GuaranteeRegime, InitialPoint, IterationRecord, IterationTrace, Method, StopRule, Verdict,
};
