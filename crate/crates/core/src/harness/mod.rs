//! Experiment sweeps, Monte Carlo aggregation and result files.

mod emit;
mod run;
mod spec;

pub use emit::{
    emit_results, format_sig9, parse_csv, parse_json, to_csv_string, to_json_string, JsonReport,
    OutputFormat, CSV_HEADER,
};
pub use run::{estimated_memory_bytes, run_experiment, sample_metrics, ResultRow};
pub use spec::{ExperimentKind, ExperimentSpec, NRule, DEFAULT_MEMORY_CAP_MB, DEFAULT_N_CAP};
