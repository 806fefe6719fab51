#![allow(dead_code)]

use discounted_oco::lab::{discounted_loss, evaluate};
use discounted_oco::{BoundInputs, BoundKind, GeneratorKind, GeneratorSpec, LossSequence, RegretReport};

pub const KINDS: [GeneratorKind; 3] = GeneratorKind::ALL;

/// Unit-diameter ball (`r = 0.5`) with `G = 1`, so `GD = 1`.
pub fn unit_spec(kind: GeneratorKind, horizon: usize, dim: usize, seed: u64) -> GeneratorSpec {
    GeneratorSpec::new(kind, horizon, dim, 1.0, 0.5, seed)
}

pub fn report(
    kind: BoundKind,
    inputs: &BoundInputs,
    decisions: &[Vec<f64>],
    seq: &LossSequence,
    horizon: usize,
) -> RegretReport {
    evaluate(kind, inputs, decisions, seq.rounds(), seq.domain(), horizon).unwrap()
}

/// `Σ_{t≤h} λ^{h−t}·values[t]` for every prefix `h`.
pub fn prefix_discounted(values: &[f64], lambda: f64) -> Vec<f64> {
    let mut acc = 0.0;
    values
        .iter()
        .map(|v| {
            acc = lambda * acc + v;
            acc
        })
        .collect()
}

pub fn loss_of(decisions: &[Vec<f64>], seq: &LossSequence, lambda: f64) -> f64 {
    discounted_loss(decisions, seq.rounds(), lambda, decisions.len()).unwrap()
}
