//! Emitters for a finished approximation: TikZ, JSON and CSV.
//!
//! JSON keeps every value in normalised orientation and records the sign of
//! each axis; TikZ and CSV print user-facing values.

mod csv;
mod json;
mod tikz;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::ParetoApproximation;
use crate::geometry::PointK;
use crate::objective::{NormalizedObjectives, Sign};

pub use self::csv::emit_csv;
pub use self::json::{emit_json, parse_json, APPROXIMATION_FORMAT};
pub use self::tikz::{emit_tikz, TikzStyle};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportBundle {
    pub approximation: ParetoApproximation,
    pub axes: Vec<Axis>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExportError {
    #[error("bundle has {axes} axes for {k} objectives")]
    AxisCount { axes: usize, k: usize },
    #[error("TikZ output needs 2 or 3 objectives, got {0}; use the CSV format instead")]
    UnsupportedDimension(usize),
    #[error("nothing to draw: the approximation has no achieved points")]
    Empty,
    #[error("invalid TikZ style: {0}")]
    Style(String),
    #[error("invalid approximation document: {0}")]
    Json(String),
}

impl ExportBundle {
    /// Axes named after the objectives of `norm`.
    pub fn new(approximation: ParetoApproximation, norm: &NormalizedObjectives) -> Self {
        let axes = norm
            .objectives
            .iter()
            .map(|o| Axis {
                name: o.spec.to_string(),
                sign: o.sign,
            })
            .collect();
        Self { approximation, axes }
    }

    /// Axes named `x`, `y`, `z` (then `x4`, ...), all maximised.
    pub fn with_default_axes(approximation: ParetoApproximation) -> Self {
        let axes = (0..approximation.k)
            .map(|i| Axis {
                name: ["x", "y", "z"].get(i).map_or_else(|| format!("x{}", i + 1), |s| s.to_string()),
                sign: Sign::Maximize,
            })
            .collect();
        Self { approximation, axes }
    }

    pub fn k(&self) -> usize {
        self.approximation.k
    }

    fn check(&self) -> Result<(), ExportError> {
        if self.axes.len() != self.k() {
            return Err(ExportError::AxisCount {
                axes: self.axes.len(),
                k: self.k(),
            });
        }
        Ok(())
    }

    /// Under points in user orientation, exact duplicates dropped.
    pub fn user_points(&self) -> Vec<PointK> {
        let mut out: Vec<PointK> = Vec::new();
        for p in &self.approximation.under_points {
            let q = PointK::new(
                p.coords()
                    .iter()
                    .zip(&self.axes)
                    .map(|(&x, a)| a.sign.apply(x))
                    .collect(),
            );
            if !out.contains(&q) {
                out.push(q);
            }
        }
        out
    }
}
