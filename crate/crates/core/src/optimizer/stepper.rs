use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::Vec3;

/// Update rule for gradient descent on per-vertex vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepRule {
    /// `x <- x - rate * g`.
    Fixed { rate: f64 },
    /// Per-coordinate scaling by exponential moving averages of the gradient
    /// and its square (bias corrected).
    Adaptive {
        rate: f64,
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_epsilon() -> f64 {
    1e-8
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Adaptive {
            rate: 0.005,
            beta1: default_beta1(),
            beta2: default_beta2(),
            epsilon: default_epsilon(),
        }
    }
}

impl StepRule {
    pub fn rate(&self) -> f64 {
        match *self {
            StepRule::Fixed { rate } | StepRule::Adaptive { rate, .. } => rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            StepRule::Fixed { rate } => rate > 0.0 && rate.is_finite(),
            StepRule::Adaptive {
                rate,
                beta1,
                beta2,
                epsilon,
            } => {
                rate > 0.0
                    && rate.is_finite()
                    && (0.0..1.0).contains(&beta1)
                    && (0.0..1.0).contains(&beta2)
                    && epsilon > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(GeoError::InvalidParameter(format!("invalid step rule {self:?}")))
        }
    }
}

/// Stateful step generator with rate halving on rejection.
///
/// Typical use: `let trial = stepper.propose(&x, &g)`; evaluate the trial;
/// then call [`Stepper::accept`] or [`Stepper::reject`] and, after a
/// rejection, [`Stepper::retry`] to get the same direction at half the rate.
#[derive(Debug, Clone)]
pub struct Stepper {
    rule: StepRule,
    rate: f64,
    growth: f64,
    m: Vec<Vec3>,
    v: Vec<Vec3>,
    t: i32,
    direction: Vec<Vec3>,
}

impl Stepper {
    /// `growth` multiplies the rate after each accepted step, capped at the
    /// rule's base rate.
    pub fn new(rule: StepRule, len: usize, growth: f64) -> Result<Self> {
        rule.validate()?;
        if !(growth >= 1.0 && growth.is_finite()) {
            return Err(GeoError::InvalidParameter("rate growth must be >= 1".into()));
        }
        Ok(Stepper {
            rule,
            rate: rule.rate(),
            growth,
            m: vec![Vec3::zeros(); len],
            v: vec![Vec3::zeros(); len],
            t: 0,
            direction: Vec::new(),
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Clears moment estimates and restores the base rate.
    pub fn reset(&mut self) {
        self.rate = self.rule.rate();
        self.m.iter_mut().for_each(|x| *x = Vec3::zeros());
        self.v.iter_mut().for_each(|x| *x = Vec3::zeros());
        self.t = 0;
        self.direction.clear();
    }

    /// Updates the moment estimates with `grad` and returns `x - rate * dir`.
    pub fn propose(&mut self, x: &[Vec3], grad: &[Vec3]) -> Vec<Vec3> {
        assert_eq!(x.len(), grad.len());
        assert_eq!(x.len(), self.m.len());
        self.direction = match self.rule {
            StepRule::Fixed { .. } => grad.to_vec(),
            StepRule::Adaptive {
                beta1,
                beta2,
                epsilon,
                ..
            } => {
                self.t += 1;
                let c1 = 1.0 - beta1.powi(self.t);
                let c2 = 1.0 - beta2.powi(self.t);
                self.m
                    .iter_mut()
                    .zip(self.v.iter_mut())
                    .zip(grad)
                    .map(|((m, v), g)| {
                        *m = *m * beta1 + g * (1.0 - beta1);
                        *v = *v * beta2 + g.component_mul(g) * (1.0 - beta2);
                        let mh = *m / c1;
                        let vh = *v / c2;
                        mh.zip_map(&vh, |a, b| a / (b.sqrt() + epsilon))
                    })
                    .collect()
            }
        };
        self.retry(x)
    }

    /// The last direction applied to `x` at the current rate.
    pub fn retry(&self, x: &[Vec3]) -> Vec<Vec3> {
        x.iter()
            .zip(&self.direction)
            .map(|(xi, d)| xi - d * self.rate)
            .collect()
    }

    pub fn accept(&mut self) {
        self.rate = (self.rate * self.growth).min(self.rule.rate());
    }

    pub fn reject(&mut self) {
        self.rate *= 0.5;
    }
}
