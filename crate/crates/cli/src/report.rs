//! On-disk report documents. Every report embeds the config it was produced
//! from and a format-version field; see schema/report.schema.json.

use serde::{Deserialize, Serialize};

use idp_hopfield::{Regime, TransitionReport};

use crate::config::ExperimentConfig;

pub const FORMAT_VERSION: u32 = 1;

/// Endpoint state of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Endpoint {
    pub t: f64,
    pub x_norm_inf: f64,
    pub overlaps: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<f64>>,
}

/// Escape-map quantities attached to coupled runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapAnalysis {
    pub kappa_critical: f64,
    pub z_minus: Option<f64>,
    pub z_plus: Option<f64>,
    pub predicted_period: Option<f64>,
    pub analytic_regime: Regime,
    pub first_escape_time: f64,
}

/// Full report of one `run` invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format_version: u32,
    pub config: ExperimentConfig,
    pub endpoint: Endpoint,
    pub transitions: TransitionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map_analysis: Option<MapAnalysis>,
}

/// Per-model metrics of a side-by-side comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    /// Largest overlap attained anywhere along the trajectory.
    pub max_overlap: f64,
    pub escape_times: Vec<f64>,
    pub intervals: Vec<f64>,
    /// Coefficient of variation of the final three intervals; absent with
    /// fewer than three.
    pub escape_cv_last3: Option<f64>,
    pub collapsed: bool,
    pub observed_regime: Option<Regime>,
}

/// Comparison of the coupled model against the one-timescale baseline on
/// matched memories and gain. Target checks apply to the coupled model in
/// the self-sustained regime only; the baseline is reported as-is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub format_version: u32,
    pub config: ExperimentConfig,
    pub analytic_regime: Regime,
    pub two_timescale: ModelMetrics,
    pub meets_overlap_target: Option<bool>,
    pub meets_cv_target: Option<bool>,
    pub kleinfeld: ModelMetrics,
}
