//! Experiment configuration: a single JSON document, overridable by CLI
//! flags, with precedence flags > file > defaults.

use std::path::PathBuf;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use idp_hopfield::{Activation, Method, OrthogonalityMode};

/// Which dynamical system a run simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Frozen-weight fast dynamics with alpha = Z0^2 e^(1).
    Idp,
    /// Coupled retrieval-reasoning system.
    TwoTimescale,
    /// One-timescale transition-matrix baseline.
    Kleinfeld,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Idp => "idp",
            ModelKind::TwoTimescale => "two_timescale",
            ModelKind::Kleinfeld => "kleinfeld",
        }
    }
}

/// Grid for regime sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub kappas: Vec<f64>,
    pub z0s: Vec<f64>,
}

fn default_model() -> ModelKind {
    ModelKind::TwoTimescale
}
fn default_n() -> usize {
    64
}
fn default_p() -> usize {
    4
}
fn default_mode() -> OrthogonalityMode {
    OrthogonalityMode::Exact
}
fn default_seed() -> u64 {
    1
}
fn default_kappa() -> f64 {
    5.0
}
fn default_tau_x() -> f64 {
    0.01
}
fn default_tau_z() -> f64 {
    1.0
}
fn default_z0() -> f64 {
    3.0
}
fn default_dt() -> f64 {
    5e-4
}
fn default_t_end() -> f64 {
    20.0
}
fn default_method() -> Method {
    Method::Rk4
}
fn default_activation() -> Activation {
    Activation::HardTanh
}
fn default_overlap_threshold() -> f64 {
    idp_hopfield::DEFAULT_OVERLAP_THRESHOLD
}
fn default_record_stride() -> usize {
    10
}
fn default_background_cue() -> f64 {
    idp_hopfield::DEFAULT_BACKGROUND_CUE
}

/// One experiment, fully determined (outputs are byte-identical across runs
/// of the same config).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_model")]
    pub model: ModelKind,
    #[serde(rename = "N", default = "default_n")]
    pub n: usize,
    #[serde(rename = "P", default = "default_p")]
    pub p: usize,
    #[serde(default = "default_mode")]
    pub mode: OrthogonalityMode,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_tau_x")]
    pub tau_x: f64,
    #[serde(default = "default_tau_z")]
    pub tau_z: f64,
    #[serde(rename = "Z0", default = "default_z0")]
    pub z0: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    #[serde(default = "default_overlap_threshold")]
    pub overlap_threshold: f64,
    #[serde(default = "default_record_stride")]
    pub record_stride: usize,
    /// Constant feature-layer cue; breaks the exact-orthogonality degeneracy
    /// of coupled runs. See the library docs for the analysis.
    #[serde(default = "default_background_cue")]
    pub background_cue: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepGrid>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults are total")
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    /// Check field-level constraints, naming the offending field.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.n == 0 {
            bail!("config field N: must be positive");
        }
        if self.p == 0 || self.p > self.n {
            bail!("config field P: must satisfy 1 <= P <= N, got P={}", self.p);
        }
        if !(self.kappa > 0.0) {
            bail!("config field kappa: must be positive, got {}", self.kappa);
        }
        if !(self.tau_x > 0.0) {
            bail!("config field tau_x: must be positive, got {}", self.tau_x);
        }
        if !(self.tau_z > 0.0) {
            bail!("config field tau_z: must be positive, got {}", self.tau_z);
        }
        if !(self.dt > 0.0) {
            bail!("config field dt: must be positive, got {}", self.dt);
        }
        if self.t_end < self.dt {
            bail!(
                "config field t_end: must be at least dt={}, got {}",
                self.dt,
                self.t_end
            );
        }
        if self.record_stride == 0 {
            bail!("config field record_stride: must be at least 1");
        }
        if !(self.overlap_threshold > 0.0 && self.overlap_threshold < 1.0) {
            bail!(
                "config field overlap_threshold: must lie in (0, 1), got {}",
                self.overlap_threshold
            );
        }
        if self.background_cue < 0.0 {
            bail!(
                "config field background_cue: must be nonnegative, got {}",
                self.background_cue
            );
        }
        // Model-specific requirements: the coupled model seeds the slow
        // state with Z0, which the escape analysis requires to exceed 1.
        if self.model == ModelKind::TwoTimescale && !(self.z0 > 1.0) {
            bail!(
                "config field Z0: two_timescale runs require Z0 > 1, got {}",
                self.z0
            );
        }
        if let Some(grid) = &self.sweep {
            if grid.kappas.is_empty() || grid.z0s.is_empty() {
                bail!("config field sweep: grid axes must be non-empty");
            }
            if grid.kappas.iter().any(|&k| !(k > 0.0)) {
                bail!("config field sweep.kappas: gains must be positive");
            }
            if grid.z0s.iter().any(|&z| !(z > 1.0)) {
                bail!("config field sweep.z0s: initial saliencies must exceed 1");
            }
        }
        Ok(())
    }
}

/// Flag-level overrides applied on top of a config file (or the defaults).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub kappa: Option<f64>,
    pub z0: Option<f64>,
    pub seed: Option<u64>,
    pub stride: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(kappa) = self.kappa {
            config.kappa = kappa;
        }
        if let Some(z0) = self.z0 {
            config.z0 = z0;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(stride) = self.stride {
            config.record_stride = stride;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let config = ExperimentConfig::default();
        let json = serde_json::to_string_pretty(&config).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let config: ExperimentConfig = serde_json::from_str(r#"{"kappa": 3.0}"#).unwrap();
        assert_eq!(config.kappa, 3.0);
        assert_eq!(config.n, 64);
        assert_eq!(config.method, Method::Rk4);
    }

    #[test]
    fn unknown_field_is_rejected_by_name() {
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"kapa": 3.0}"#).unwrap_err();
        assert!(err.to_string().contains("kapa"));
    }

    #[test]
    fn validation_names_fields() {
        let mut config = ExperimentConfig::default();
        config.z0 = 0.5;
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("Z0"));

        let mut config = ExperimentConfig::default();
        config.dt = -1.0;
        assert!(config.validate().unwrap_err().to_string().contains("dt"));
    }

    #[test]
    fn overrides_take_precedence() {
        let mut config = ExperimentConfig::default();
        let over = Overrides {
            kappa: Some(4.5),
            z0: None,
            seed: Some(9),
            stride: None,
        };
        over.apply(&mut config);
        assert_eq!(config.kappa, 4.5);
        assert_eq!(config.seed, 9);
        assert_eq!(config.z0, 3.0);
    }
}
