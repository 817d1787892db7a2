//! Benchmark harness: experiment files, run matrices, persisted artifacts,
//! replay, plots and comparison reports.

mod config;
mod manifest;
mod matrix;
mod plot;
mod report;
mod trace_csv;

pub use config::{known_keys, parse_config, parse_config_file, parse_overrides, Experiment, OutputSettings};
pub use manifest::{run_id, RunManifest, TOOL_VERSION};
pub use matrix::{
    load_labeled_traces, replay, run_matrix, MatrixResult, ReplayResult, RunArtifact, MANIFEST_FILE,
    PLOT_FILE, REPORT_FILE,
};
pub use plot::{components_in, render_convergence_plot, render_convergence_svg, trailing_mean};
pub use report::{ComparisonReport, ReportRow};
pub use trace_csv::{
    read_trace, read_trace_csv, trace_to_string, without_elapsed, write_trace, write_trace_csv, TRACE_COLUMNS,
};
