//! Shared density-curve container used by the closed-form and Monte Carlo
//! routes.

use serde::Serialize;

/// A grid of horizon values with per-route density values and uncertainties.
/// Deterministic routes carry zero `stderr`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCurve {
    pub s: Vec<f64>,
    pub value: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl DensityCurve {
    pub fn new(s: Vec<f64>, value: Vec<f64>, stderr: Vec<f64>) -> Self {
        assert_eq!(s.len(), value.len());
        assert_eq!(s.len(), stderr.len());
        DensityCurve { s, value, stderr }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}
