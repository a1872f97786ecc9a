//! Dataset ingestion, run configuration and report emission.

pub mod config;
pub mod dataset;
pub mod published;
pub mod report;

pub use config::{ComponentConfig, RunConfig};
pub use dataset::{
    load_dataset, load_trend, readings_from_str, trend_from_str, write_dataset, Dataset,
};
pub use published::{
    Computed, DeviationNote, KnownTypo, Published, PublishedValue, Quantity, Tolerance,
};
pub use report::{
    emit, format_sig, read_report_json, render, ComponentReport, Format, Prediction, Report,
};
