//! Run configuration read from JSON. Every section is optional and falls back
//! to the default `N = 6, k = 4, h = 2, kbar = 1` setup.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bubble::BubbleParams;
use crate::error::{Error, Result};
use crate::geometry::{validate_geometry, Geometry};
use crate::model::{validate_model, CurvatureModel};
use crate::norms::DEFAULT_THETA;
use crate::projection::ProjectionConfig;
use crate::quad::QuadratureSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Grids {
    /// Periods for the expansion-residual study.
    #[serde(rename = "L_grid")]
    pub l_grid: Vec<f64>,
    /// Concentrations for the `‖l‖_**` study; `L` follows from the reduced solution.
    pub lambda_grid: Vec<f64>,
    /// Periods for the consistency check.
    #[serde(rename = "consistency_L_grid")]
    pub consistency_l_grid: Vec<f64>,
    /// Points for the sandwich and periodicity checks.
    pub sandwich_points: usize,
    /// Points in `B₁(x̂)` for the expansion residual.
    pub expansion_points: usize,
    /// Outer Monte Carlo samples of the consistency check.
    pub consistency_samples: usize,
    /// Random points for the nonlinear-remainder exponent.
    pub remainder_points: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            l_grid: vec![8.0, 16.0, 32.0],
            lambda_grid: vec![1e3, 1e4, 1e5, 1e6, 1e7],
            consistency_l_grid: vec![16.0, 32.0, 64.0],
            sandwich_points: 100,
            expansion_points: 24,
            consistency_samples: 200_000,
            remainder_points: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub model: CurvatureModel,
    pub bubble: BubbleParams,
    pub theta: f64,
    pub quadrature: QuadratureSpec,
    pub projection: ProjectionConfig,
    pub grids: Grids,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            geometry: Geometry::new(6, 4, 2, 1, 32.0),
            model: CurvatureModel::default_n6(),
            bubble: BubbleParams::centered(2, 50.0),
            theta: DEFAULT_THETA,
            quadrature: QuadratureSpec::default(),
            projection: ProjectionConfig::default(),
            grids: Grids::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Hypothesis violations and malformed settings, as messages.
    pub fn violations(&self) -> Vec<String> {
        let mut v = validate_geometry(&self.geometry);
        if v.is_empty() {
            match validate_model(&self.model, &self.geometry) {
                Ok(m) => v.extend(m),
                Err(e) => v.push(e.to_string()),
            }
            if let Err(e) = self.bubble.validate(&self.geometry) {
                v.push(e.to_string());
            }
        }
        if !(self.theta > 0.0 && self.theta < 0.1) {
            v.push(format!("θ ∈ (0, 1/10) fails: θ = {}", self.theta));
        }
        for r in [self.quadrature.validate(), self.projection.validate()] {
            if let Err(e) = r {
                v.push(e.to_string());
            }
        }
        v
    }

    /// Overrides every seed with `seed`.
    pub fn reseed(&mut self, seed: u64) {
        self.quadrature.mc_seed = seed;
        self.projection.seed = seed;
    }
}
