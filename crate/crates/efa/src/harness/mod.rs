//! Experiment orchestration: config files, the three experiment families,
//! error reports with log-log slope fits, CSV emission, and the acceptance
//! checks.

pub mod checks;
pub mod config;
pub mod experiments;
pub mod report;

pub use checks::{run_all, CheckResult};
pub use config::{ExperimentConfig, ExperimentKind, RawConfig};
pub use experiments::{
    homogenized_reference, run_experiment, run_solution_comparison_1d,
    run_solution_comparison_2d, run_upscaling_sweep, ReferenceTensor, SolutionReport,
};
pub use report::{fit_loglog_slope, SweepReport, SweepRow};
