//! Discounted-Normal-Predictor and its conservative-update variant.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::special::{Confidence, ConfidenceParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateMode {
    /// Always `x ← ρx + b`.
    Plain,
    /// Ignore the bit when confidence is saturated and the prediction is right.
    Conservative,
}

/// Which update rule fired in a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `x ← ρx + b`
    Accepted,
    /// `x ← ρx`
    Ignored,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Accepted => "accept",
            Branch::Ignored => "ignore",
        }
    }
}

/// State of one bit predictor: the discounted deviation `x` and its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictorState {
    x: f64,
    rho: f64,
    confidence: Confidence,
    mode: UpdateMode,
    round: usize,
}

impl PredictorState {
    pub fn new(params: ConfidenceParams, mode: UpdateMode) -> Result<Self> {
        Ok(Self::with_confidence(Confidence::new(params)?, mode))
    }

    /// Reuses an already computed threshold.
    pub fn with_confidence(confidence: Confidence, mode: UpdateMode) -> Self {
        Self {
            x: 0.0,
            rho: confidence.params().rho(),
            confidence,
            mode,
            round: 0,
        }
    }

    pub fn deviation(&self) -> f64 {
        self.x
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn threshold(&self) -> f64 {
        self.confidence.threshold()
    }

    pub fn confidence(&self) -> &Confidence {
        &self.confidence
    }

    pub fn mode(&self) -> UpdateMode {
        self.mode
    }

    /// Number of bits consumed so far.
    pub fn round(&self) -> usize {
        self.round
    }

    /// Current confidence `g(x) ∈ [0, 1]`.
    pub fn predict(&self) -> f64 {
        self.confidence.value(self.x)
    }

    /// Whether the conservative rule would accept bit `b` at the current deviation.
    /// Ties at `x = 0` and `x = U` accept.
    pub fn accepts(&self, b: f64) -> bool {
        match self.mode {
            UpdateMode::Plain => true,
            UpdateMode::Conservative => {
                let (x, u) = (self.x, self.threshold());
                (0.0..=u).contains(&x) || (x < 0.0 && b > 0.0) || (x > u && b < 0.0)
            }
        }
    }

    /// Consumes bit `b ∈ [−1, 1]` and reports the branch taken.
    pub fn update(&mut self, b: f64) -> Result<Branch> {
        if !(-1.0..=1.0).contains(&b) {
            return Err(Error::BitOutOfRange(b));
        }
        let branch = if self.accepts(b) {
            self.x = self.rho * self.x + b;
            Branch::Accepted
        } else {
            self.x *= self.rho;
            Branch::Ignored
        };
        self.round += 1;
        Ok(branch)
    }

    /// Value-style update returning the successor state.
    pub fn updated(mut self, b: f64) -> Result<Self> {
        self.update(b)?;
        Ok(self)
    }
}

/// Full replay of a predictor over a bit sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorRun {
    /// `predictions[t] = g(deviations[t])`
    pub predictions: Vec<f64>,
    /// `deviations[0] = 0`; length `T + 1`.
    pub deviations: Vec<f64>,
    pub branches: Vec<Branch>,
    pub threshold: f64,
}

impl PredictorRun {
    /// The bits actually folded into `x`: `b_t` where the update accepted, else 0.
    pub fn transformed_bits(&self, bits: &[f64]) -> Vec<f64> {
        bits.iter()
            .zip(&self.branches)
            .map(|(&b, br)| if *br == Branch::Accepted { b } else { 0.0 })
            .collect()
    }

    /// CSV trace with one row per round: `t,x,g,b,branch`.
    pub fn trace_csv(&self, bits: &[f64]) -> String {
        let mut out = String::from("t,x,g,b,branch\n");
        for (t, ((x, p), (b, br))) in self
            .deviations
            .iter()
            .zip(&self.predictions)
            .zip(bits.iter().zip(&self.branches))
            .enumerate()
        {
            let _ = writeln!(out, "{},{},{},{},{}", t + 1, x, p, b, br.as_str());
        }
        out
    }
}

pub fn run_sequence(params: ConfidenceParams, mode: UpdateMode, bits: &[f64]) -> Result<PredictorRun> {
    run_with(PredictorState::new(params, mode)?, bits)
}

/// Replays `bits` from a fresh state built on a cached confidence function.
pub fn run_with(mut state: PredictorState, bits: &[f64]) -> Result<PredictorRun> {
    let mut predictions = Vec::with_capacity(bits.len());
    let mut deviations = Vec::with_capacity(bits.len() + 1);
    let mut branches = Vec::with_capacity(bits.len());
    deviations.push(state.deviation());
    for &b in bits {
        predictions.push(state.predict());
        branches.push(state.update(b)?);
        deviations.push(state.deviation());
    }
    Ok(PredictorRun {
        predictions,
        deviations,
        branches,
        threshold: state.threshold(),
    })
}

/// `Σ_t discount^{T−t}·predictions[t]·bits[t]`, summed from the last round backwards.
pub fn discounted_payoff(predictions: &[f64], bits: &[f64], discount: f64) -> Result<f64> {
    if predictions.len() != bits.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: bits.len(),
        });
    }
    let mut weight = 1.0;
    let mut acc = 0.0;
    for (c, b) in predictions.iter().zip(bits).rev() {
        acc += weight * c * b;
        weight *= discount;
    }
    Ok(acc)
}

/// `Σ_t discount^{T−t}·values[t]`.
pub fn discounted_sum(values: &[f64], discount: f64) -> f64 {
    let mut weight = 1.0;
    let mut acc = 0.0;
    for v in values.iter().rev() {
        acc += weight * v;
        weight *= discount;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::g;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> ConfidenceParams {
        ConfidenceParams::new(256.0, 1.0 / 1024.0).unwrap()
    }

    #[test]
    fn fresh_state_predicts_zero() {
        let s = PredictorState::new(params(), UpdateMode::Conservative).unwrap();
        assert_eq!(s.predict(), 0.0);
        assert_eq!(s.deviation(), 0.0);
        assert!((s.rho() - (1.0 - 1.0 / 256.0)).abs() < 1e-15);
    }

    #[test]
    fn predictions_at_and_between_thresholds() {
        let mut s = PredictorState::new(params(), UpdateMode::Plain).unwrap();
        let u = s.threshold();
        s.x = u + 0.25;
        assert_eq!(s.predict(), 1.0);
        s.x = u / 2.0;
        let mid = s.predict();
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn conservative_branches() {
        let base = PredictorState::new(params(), UpdateMode::Conservative).unwrap();
        let u = base.threshold();
        let rho = base.rho();

        let mut s = base;
        s.x = u + 0.5;
        assert_eq!(s.update(1.0).unwrap(), Branch::Ignored);
        assert_eq!(s.deviation(), rho * (u + 0.5));

        let mut s = base;
        s.x = -0.5;
        assert_eq!(s.update(1.0).unwrap(), Branch::Accepted);
        assert_eq!(s.deviation(), -0.5 * rho + 1.0);

        // x < 0 with b = 0 falls to the ignore branch.
        let mut s = base;
        s.x = -0.5;
        assert_eq!(s.update(0.0).unwrap(), Branch::Ignored);

        // Boundary ties accept.
        let mut s = base;
        s.x = u;
        assert_eq!(s.update(1.0).unwrap(), Branch::Accepted);
        assert_eq!(s.round(), 1);
    }

    #[test]
    fn out_of_range_bit_rejected() {
        let mut s = PredictorState::new(params(), UpdateMode::Plain).unwrap();
        assert_eq!(s.update(1.5), Err(Error::BitOutOfRange(1.5)));
        assert!(s.updated(-1.0).is_ok());
    }

    #[test]
    fn zero_bits_are_a_fixed_point() {
        let run = run_sequence(params(), UpdateMode::Conservative, &[0.0; 100]).unwrap();
        assert!(run.deviations.iter().all(|&x| x == 0.0));
        assert!(run.predictions.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn empty_sequence() {
        let run = run_sequence(params(), UpdateMode::Conservative, &[]).unwrap();
        assert!(run.predictions.is_empty());
        assert_eq!(run.deviations, vec![0.0]);
    }

    #[test]
    fn all_ones_saturate_and_stay_bounded() {
        // n = 256 exceeds U ≈ 142.7, so a run of +1 bits drives x past U.
        let run = run_sequence(params(), UpdateMode::Conservative, &[1.0; 5000]).unwrap();
        let u = run.threshold;
        assert!(run.deviations.iter().all(|&x| x <= u + 1.0 + 1e-9));
        let first = run.predictions.iter().position(|&p| p == 1.0).expect("saturates");
        // Conservative updates let x decay into (ρU, U] before accepting again.
        let floor = g(params().rho() * u, &params());
        assert!(run.predictions[first..].iter().all(|&p| p >= floor));
        assert!(floor > 0.95);

        let plain = run_sequence(params(), UpdateMode::Plain, &[1.0; 5000]).unwrap();
        let first = plain.predictions.iter().position(|&p| p == 1.0).expect("saturates");
        assert!(plain.predictions[first..].iter().all(|&p| p == 1.0));
    }

    #[test]
    fn payoff_examples() {
        assert_eq!(discounted_payoff(&[0.0; 3], &[1.0, -1.0, 1.0], 0.9).unwrap(), 0.0);
        assert_eq!(discounted_payoff(&[1.0, 1.0], &[1.0, -1.0], 0.5).unwrap(), -0.5);
        assert!(discounted_payoff(&[1.0], &[1.0, 1.0], 0.5).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = 3000;
        let preds: Vec<f64> = (0..t).map(|_| rng.random()).collect();
        let bits: Vec<f64> = (0..t).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let naive: f64 = (0..t)
            .map(|i| 0.999f64.powi((t - 1 - i) as i32) * preds[i] * bits[i])
            .sum();
        let fast = discounted_payoff(&preds, &bits, 0.999).unwrap();
        assert!((fast - naive).abs() <= 1e-9 * naive.abs().max(1.0));
    }

    #[test]
    fn trace_has_one_row_per_round() {
        let bits = [1.0, -0.5, 0.25];
        let run = run_sequence(params(), UpdateMode::Conservative, &bits).unwrap();
        let csv = run.trace_csv(&bits);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("t,x,g,b,branch\n1,0,0,1,accept"));
    }
}
