//! Experiment orchestration behind the `peife` binary.

pub mod config;
pub mod output;
pub mod snapshots;
pub mod studies;

pub use config::{ExperimentConfig, Method, SourceHandling, Study, WORKERS_ENV};
pub use output::{
    convergence_rate, format_rate, format_sci, growth_factor, write_rows, ResultRow, RESULT_HEADERS,
};
pub use snapshots::{emit_snapshots, snapshot_fields, Snapshot};
pub use studies::{
    run_convergence_study, run_parareal_trace, run_perf_growth, run_single, PerfRow, TraceReport, TraceRow,
};
