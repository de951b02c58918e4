//! Elementwise activation functions and their derivatives and antiderivatives.
//!
//! HardTanh is the activation used throughout the sequential-retrieval
//! analysis: psi(s) = max{-1, min{s, 1}}, linear on (-1, 1) and saturated
//! outside. Identity realizes the un-squashed feature layer of the reduced
//! two-timescale model.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

/// Activation kind, selectable by name in experiment configs
/// ("hardtanh" / "identity").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    HardTanh,
    Identity,
}

impl Activation {
    /// Scalar evaluation psi(s).
    pub fn eval(self, s: f64) -> f64 {
        match self {
            Activation::HardTanh => s.clamp(-1.0, 1.0),
            Activation::Identity => s,
        }
    }

    /// Scalar derivative psi'(s).
    ///
    /// For HardTanh the derivative is 1 on (-1, 1) and 0 outside; at the
    /// kinks |s| = 1 the convention is 0, matching the saturated-regime
    /// stability computation.
    pub fn derivative(self, s: f64) -> f64 {
        match self {
            Activation::HardTanh => {
                if s.abs() < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    /// Antiderivative int_0^s psi(u) du.
    ///
    /// HardTanh: s^2/2 on |s| <= 1 and |s| - 1/2 outside; continuous with
    /// continuous first derivative at the kinks.
    pub fn antiderivative(self, s: f64) -> f64 {
        match self {
            Activation::HardTanh => {
                if s.abs() <= 1.0 {
                    0.5 * s * s
                } else {
                    s.abs() - 0.5
                }
            }
            Activation::Identity => 0.5 * s * s,
        }
    }

    /// Elementwise application Psi(x) = (psi(x_1), ..., psi(x_N)).
    pub fn apply(self, x: &Array1<f64>) -> Array1<f64> {
        x.mapv(|s| self.eval(s))
    }

    /// Elementwise derivative vector (psi'(x_1), ..., psi'(x_N)).
    pub fn apply_derivative(self, x: &Array1<f64>) -> Array1<f64> {
        x.mapv(|s| self.derivative(s))
    }
}
