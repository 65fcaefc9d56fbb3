//! Experiment runner: configuration, orchestration, sweeps and reports.
//!
//! Configs are sectioned `key = value` files flattened to `section.key`
//! strings, so command-line overrides and sweep axes share one syntax.

mod config;
mod pipeline;
mod profiles;
mod report;
mod sweep;

pub use config::{
    apply_overrides, config_hash, load_config, parse_config, ConfigMap, CutoffSettings, EstimateScope, InitialProfile,
    RunConfig,
};
pub use pipeline::{check_conditions, convergence_study, cutoff_test, run, solve_only, MIN_ORDER};
pub use profiles::{initial_values, random_smooth};
pub use report::{
    checks_csv, conditions_csv, convergence_csv, emit, lemma_csv, solution_csv, CheckOutcome, OracleComparison,
    OutputFormat, ReportBundle, SolutionTable, SolveSummary, Verdict,
};
pub use sweep::{axes_from_config, sweep, SweepAxis, SweepReport, SweepRow, DEFAULT_SWEEP_CAP};

/// Writes a sweep's summary table as `sweep.csv` under `dir`.
pub fn emit_sweep(report: &SweepReport, dir: &std::path::Path) -> crate::Result<std::path::PathBuf> {
    report::write_file(dir, "sweep.csv", &report.to_csv())
}
