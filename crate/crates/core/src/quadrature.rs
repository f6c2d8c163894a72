//! Log-spaced trapezoid rules on [t_min, t_max].

use serde::Serialize;

use crate::error::{invalid, Result};

/// Log-spaced t-grid with a declared truncation interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub nodes: usize,
}

impl Default for LogGrid {
    /// [10⁻⁶, 10³] with 200 nodes.
    fn default() -> Self {
        Self { t_min: 1e-6, t_max: 1e3, nodes: 200 }
    }
}

impl LogGrid {
    pub fn new(t_min: f64, t_max: f64, nodes: usize) -> Result<Self> {
        let g = Self { t_min, t_max, nodes };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_max.is_finite()) {
            return invalid(format!("t-range [{}, {}] must satisfy 0 < t_min < t_max", self.t_min, self.t_max));
        }
        if self.nodes < 3 {
            return invalid("a t-grid needs at least 3 nodes");
        }
        Ok(())
    }

    /// Spacing in τ = ln t.
    pub fn step(&self) -> f64 {
        (self.t_max / self.t_min).ln() / (self.nodes - 1) as f64
    }

    /// (t_k, w_k) such that Σ w_k f(t_k) ≈ ∫ f(t) dt over the interval.
    pub fn nodes_weights(&self) -> Vec<(f64, f64)> {
        let d = self.step();
        let l0 = self.t_min.ln();
        (0..self.nodes)
            .map(|k| {
                let t = (l0 + k as f64 * d).exp();
                let end = k == 0 || k + 1 == self.nodes;
                (t, if end { 0.5 * d * t } else { d * t })
            })
            .collect()
    }
}
