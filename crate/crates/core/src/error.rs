//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pattern count P={p} exceeds neuron count N={n}")]
    TooManyPatterns { n: usize, p: usize },
    #[error("exact orthogonality requires N to be a power of two, got N={n}")]
    ExactRequiresPowerOfTwo { n: usize },
    #[error("{n} must be positive")]
    ZeroDimension { n: &'static str },
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("cyclic reasoning matrix requires P >= 2, got P={p}")]
    CycleTooShort { p: usize },
    #[error("{name}={value} is outside the escape-map domain (requires {name} > 1)")]
    BelowUnitSaliency { name: &'static str, value: f64 },
    #[error("gain kappa={kappa} is below the critical gain 4")]
    SubcriticalGain { kappa: f64 },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("non-finite state during integration at t={t}")]
    NonFiniteState { t: f64 },
    #[error("trajectory contains no recorded states")]
    EmptyTrajectory,
    #[error(
        "timescale ratio tau_x/tau_z={ratio} too large for the reduced-map comparison (requires <= 0.05)"
    )]
    InsufficientTimescaleSeparation { ratio: f64 },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
