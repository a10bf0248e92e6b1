//! Experiment harness: configuration files, CLI-style overrides, the
//! (settings x seeds) run matrix, baselines, ablations, grid search, and
//! machine-readable reports.

pub mod config;
pub mod report;
pub mod run;

pub use config::{
    ablation_grid, resolve, AblationSubset, DatasetKind, FileConfig, Mode, Overrides,
    ResolvedConfig,
};
pub use report::{compare_report, ComparisonReport, ComparisonRow, CurvePoint};
pub use run::{
    execute, fixed_method_label, load_summary, write_outputs, CandidateScore, GridSearchReport,
    MeanStd, PhaseRow, RunArtifacts, RunSummary, SeedStats, SettingStats, TraceRow,
};
