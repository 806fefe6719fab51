//! Two-stream aggregation through one conservative DNP instance.

use crate::dnp::{PredictorState, UpdateMode};
use crate::domain::ProblemBounds;
use crate::error::{Error, Result};
use crate::special::{Confidence, ConfidenceParams};

const RANGE_SLACK: f64 = 1e-9;

/// Mixes two decision streams as `(1 − ω)·w1 + ω·w2`, where `ω` is the
/// predictor's confidence that stream 2 beats stream 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinerState {
    predictor: PredictorState,
    omega: f64,
    bounds: ProblemBounds,
}

impl CombinerState {
    pub fn new(rho: f64, z: f64, bounds: ProblemBounds) -> Result<Self> {
        let params = ConfidenceParams::from_discount(rho, z)?;
        Ok(Self::with_confidence(Confidence::new(params)?, bounds))
    }

    pub fn with_confidence(confidence: Confidence, bounds: ProblemBounds) -> Self {
        let predictor = PredictorState::with_confidence(confidence, UpdateMode::Conservative);
        Self {
            omega: predictor.predict(),
            predictor,
            bounds,
        }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn predictor(&self) -> &PredictorState {
        &self.predictor
    }

    pub fn combine(&self, w1: &[f64], w2: &[f64]) -> Result<Vec<f64>> {
        if w1.len() != w2.len() {
            return Err(Error::DimensionMismatch {
                expected: w1.len(),
                got: w2.len(),
            });
        }
        let om = self.omega;
        Ok(w1.iter().zip(w2).map(|(a, b)| (1.0 - om) * a + om * b).collect())
    }

    /// Feeds the round's losses of both streams; returns the bit
    /// `ℓ = (f(w1) − f(w2))/(GD)` passed to the predictor.
    pub fn feed_losses(&mut self, f_at_w1: f64, f_at_w2: f64) -> Result<f64> {
        let gd = self.bounds.gd();
        for v in [f_at_w1, f_at_w2] {
            if !(v >= -RANGE_SLACK && v <= gd + RANGE_SLACK) {
                return Err(Error::LossOutOfRange { value: v, gd });
            }
        }
        let bit = ((f_at_w1 - f_at_w2) / gd).clamp(-1.0, 1.0);
        self.predictor.update(bit)?;
        self.omega = self.predictor.predict();
        Ok(bit)
    }
}
