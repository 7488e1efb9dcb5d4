//! Benchmark harness: dataset loading, the scenario × imputer run matrix and
//! report writing.

pub mod config;
pub mod ingest;
pub mod report;
pub mod run;
pub mod score;

pub use config::{DatasetConfig, ImputerEntry, RunConfig, SegmentConfig, SynthBody};
pub use ingest::{ingest_csv, write_series_csv, CsvColumns};
pub use report::{
    read_records_csv, render_markdown, results_json, write_records_csv, write_report,
};
pub use run::{
    derive_seed, run, run_with_jobs, Aggregates, BenchReport, ReportMeta, SURROGATE_NOTE,
};
pub use score::{score_files, FileScore};
