use std::path::Path;

use serde::{Deserialize, Serialize};

use super::stepper::StepRule;
use crate::error::{GeoError, Result};
use crate::losses::{LossOptions, LossWeights};

/// When the predicted-surface sample positions (face and barycentric
/// coordinates) are redrawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResamplePolicy {
    /// Once per (stage, class). The loss is then a fixed function of the
    /// displacement within a stage, so accepted losses never increase.
    #[default]
    PerStage,
    /// Before every iteration; acceptance compares against the current
    /// displacement re-evaluated on the new samples.
    PerIteration,
}

/// How the predicted cloud is formed from the current mesh.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredSampling {
    /// Area-weighted random surface samples with face normals.
    #[default]
    Surface,
    /// The mesh vertices with vertex normals.
    Vertices,
}

/// Settings for [`super::fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeformConfig {
    pub stages: usize,
    pub iterations: usize,
    pub step: StepRule,
    /// Factor applied to the step rate after an accepted step (capped at the
    /// base rate).
    pub rate_growth: f64,
    /// Rejected trials allowed per iteration before the stage stops.
    pub max_halvings: u32,
    pub resample: ResamplePolicy,
    pub pred_sampling: PredSampling,
    /// Surface samples per predicted cloud; defaults to the ground-truth size.
    pub pred_samples: Option<usize>,
    /// A stage stops once an accepted step lowers the loss by less than this
    /// fraction.
    pub tolerance: f64,
    /// A stage stops when the largest gradient component falls below this.
    pub gradient_tolerance: f64,
    pub kappa_max: f64,
    pub losses: LossOptions,
    /// Clear adaptive step state at each stage boundary.
    pub reset_per_stage: bool,
    pub weights: LossWeights,
}

impl Default for DeformConfig {
    fn default() -> Self {
        DeformConfig {
            stages: 4,
            iterations: 250,
            step: StepRule::default(),
            rate_growth: 1.1,
            max_halvings: 20,
            resample: ResamplePolicy::default(),
            pred_sampling: PredSampling::default(),
            pred_samples: None,
            tolerance: 1e-10,
            gradient_tolerance: 1e-12,
            kappa_max: crate::geometry::DEFAULT_KAPPA_MAX,
            losses: LossOptions::default(),
            reset_per_stage: true,
            weights: LossWeights::cortical(),
        }
    }
}

impl DeformConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(GeoError::InvalidParameter(m.to_string()));
        if self.stages == 0 {
            return bad("stages must be >= 1");
        }
        if self.iterations == 0 {
            return bad("iterations must be >= 1");
        }
        self.step.validate()?;
        if !(self.rate_growth >= 1.0 && self.rate_growth.is_finite()) {
            return bad("rate_growth must be >= 1");
        }
        if self.pred_samples == Some(0) {
            return bad("pred_samples must be positive");
        }
        if !(self.tolerance >= 0.0 && self.gradient_tolerance >= 0.0) {
            return bad("tolerances must be nonnegative");
        }
        if !(self.kappa_max >= 1.0 && self.kappa_max.is_finite()) {
            return bad("kappa_max must be >= 1");
        }
        self.weights.validate()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let c: DeformConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
