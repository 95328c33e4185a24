//! Experiment driver for the short-pulse solver: pulse-width sweeps with
//! slope fits, convergence studies against exact solutions, smallness on
//! the last ingoing cone, the focusing contrast, Sobolev and energy audits,
//! and the report files they produce.

pub mod audit;
pub mod config;
pub mod contrast;
pub mod convergence;
pub mod fit;
pub mod ode;
pub mod prop61;
pub mod report;
pub mod run;
pub mod single;
pub mod sweep;

pub use config::{ConfigError, Experiment, RunConfig};
pub use fit::{FitRule, ScalingFit, Verdict};
pub use report::{emit_report, Check, Results};

/// Runs the experiment selected by `config.experiment`.
pub fn run_experiment(config: &RunConfig) -> Results {
    match config.experiment {
        Experiment::SingleRun => single::single_run(config),
        Experiment::DeltaSweep => sweep::delta_sweep(config),
        Experiment::Convergence => convergence::convergence_study(config),
        Experiment::Prop61 => prop61::prop61_check(config),
        Experiment::FocusingContrast => contrast::focusing_contrast(config),
        Experiment::SobolevAudit => audit::sobolev_audit(config),
    }
}
