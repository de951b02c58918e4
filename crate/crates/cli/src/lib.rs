//! Experiment runner for the IDP Hopfield sequential-retrieval toolkit:
//! configuration, orchestration, and flat-file data export.

pub mod config;
pub mod ops;
pub mod report;

pub use config::{ExperimentConfig, ModelKind, Overrides, SweepGrid};
pub use report::{CompareReport, Endpoint, MapAnalysis, ModelMetrics, RunReport, FORMAT_VERSION};
