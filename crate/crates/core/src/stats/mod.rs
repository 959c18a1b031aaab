//! Estimation, comparison against the quantum pmf, and parallel sweeps.

mod estimate;
mod sweep;

pub use estimate::{
    compare, estimate, tv_confidence, z_score, CellCounts, Comparison, Z_THRESHOLD,
};
pub use sweep::{
    count_outcomes, domain, random_settings, run_baseline_sweep, run_sweep, setting_report,
    simulate_setting, summarize, BaselineConfig, BaselineReport, BaselineSetting, BaselineSummary,
    CalibrationBlock, ConventionComparison, MomentCheck, OutcomeSource, PreflipBlock,
    ProtocolSource, QmSource, ReportConfig, Setting, SettingReport, SingletSource, Summary,
    SweepConfig, SweepReport, CHUNK_SIZE, FLIP_IDENTITY_TOL, MIN_SWEEP_TRIALS, SCHEMA_VERSION,
};
