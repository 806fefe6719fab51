//! Invariant corpus for the bit predictor: payoff lower bounds, deviation
//! bounds, transformed-sequence equivalence, pointwise bit inequalities and
//! the potential inequality.

use std::fmt;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dnp::{discounted_payoff, discounted_sum, run_with, Branch, PredictorRun, PredictorState, UpdateMode};
use crate::error::{invalid, Result};
use crate::special::{Confidence, ConfidenceParams};

/// Tolerance for the exact-arithmetic payoff and deviation bounds.
pub const PAYOFF_TOL: f64 = 1e-9;
/// Tolerance for checks that involve quadrature of the potential.
pub const POTENTIAL_TOL: f64 = 1e-6;
/// Tolerance for the grid check `Φ(x) ≤ x·g(x)/2`.
pub const HALF_CHORD_TOL: f64 = 1e-8;

/// How the bits of one sequence are produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BitFamily {
    /// Uniform ±1.
    Rademacher,
    /// `+1` with probability `p`, else `−1`.
    Biased(f64),
    /// `b_t = −sign(g(x_t))` when `g(x_t) ≠ 0`, else `−1`.
    AntiPredictor,
    /// `−1` whenever the prediction is positive and `+1` otherwise; keeps `x`
    /// hovering around the origin where the payoff bound is tight.
    Oscillating,
    /// Uniform on `[−1, 1]`.
    UniformReal,
}

impl BitFamily {
    fn next_bit(&self, rng: &mut ChaCha8Rng, prediction: f64) -> f64 {
        match *self {
            BitFamily::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            BitFamily::Biased(p) => {
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    -1.0
                }
            }
            BitFamily::AntiPredictor => {
                if prediction != 0.0 {
                    -prediction.signum()
                } else {
                    -1.0
                }
            }
            BitFamily::Oscillating => {
                if prediction > 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
            BitFamily::UniformReal => rng.random_range(-1.0..=1.0),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, BitFamily::AntiPredictor | BitFamily::Oscillating)
    }
}

impl fmt::Display for BitFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BitFamily::Rademacher => f.write_str("rademacher"),
            BitFamily::Biased(p) => write!(f, "biased-{p}"),
            BitFamily::AntiPredictor => f.write_str("anti-predictor"),
            BitFamily::Oscillating => f.write_str("oscillating"),
            BitFamily::UniformReal => f.write_str("uniform-real"),
        }
    }
}

/// Plays `horizon` rounds of `family` against a fresh predictor.
pub fn play(
    confidence: Confidence,
    mode: UpdateMode,
    family: BitFamily,
    horizon: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, PredictorRun)> {
    let mut state = PredictorState::with_confidence(confidence, mode);
    let mut bits = Vec::with_capacity(horizon);
    let mut predictions = Vec::with_capacity(horizon);
    let mut deviations = Vec::with_capacity(horizon + 1);
    let mut branches = Vec::with_capacity(horizon);
    deviations.push(state.deviation());
    for _ in 0..horizon {
        let p = state.predict();
        let b = family.next_bit(rng, p);
        predictions.push(p);
        branches.push(state.update(b)?);
        bits.push(b);
        deviations.push(state.deviation());
    }
    let run = PredictorRun {
        predictions,
        deviations,
        branches,
        threshold: confidence.threshold(),
    };
    Ok((bits, run))
}

/// Discount used for a payoff check, relative to the predictor's `ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaChoice {
    Rho,
    /// `(1 + ρ)/2`
    Midpoint,
    Fixed(f64),
}

impl EtaChoice {
    pub fn resolve(&self, rho: f64) -> f64 {
        match *self {
            EtaChoice::Rho => rho,
            EtaChoice::Midpoint => 0.5 * (1.0 + rho),
            EtaChoice::Fixed(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusConfig {
    /// `(n, Z)` cells.
    pub cells: Vec<(f64, f64)>,
    pub etas: Vec<EtaChoice>,
    pub families: Vec<BitFamily>,
    /// Sequences per random family; deterministic families run once.
    pub sequences_per_family: usize,
    pub horizon: usize,
    /// Plain-mode sequences for the potential-augmented payoff bounds.
    pub plain_sequences: usize,
    pub plain_horizon: usize,
    /// `(n, Z)` cells for the grid check `Φ(x) ≤ x·g(x)/2`.
    pub half_chord_cells: Vec<(f64, f64)>,
    pub half_chord_points: usize,
    /// `(n, T)` cells with `Z = 1/T` for the geometric check.
    pub geometric_cells: Vec<(f64, f64)>,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            cells: vec![(256.0, 1.0 / 1024.0), (1024.0, 1.0 / 8192.0)],
            etas: vec![EtaChoice::Rho, EtaChoice::Midpoint, EtaChoice::Fixed(0.999)],
            families: vec![
                BitFamily::Rademacher,
                BitFamily::Biased(0.3),
                BitFamily::Biased(0.7),
                BitFamily::AntiPredictor,
                BitFamily::Oscillating,
                BitFamily::UniformReal,
            ],
            sequences_per_family: 250,
            horizon: 10_000,
            plain_sequences: 100,
            plain_horizon: 2000,
            half_chord_cells: vec![(64.0, 1.0 / 1024.0), (256.0, 1.0 / 4096.0), (1024.0, 1.0 / 8192.0)],
            half_chord_points: 10_000,
            geometric_cells: vec![
                (32.0, 32.0),
                (32.0, 8192.0),
                (256.0, 1024.0),
                (512.0, 8192.0),
                (1024.0, 8192.0),
            ],
            seed: 0,
        }
    }
}

/// Minimum margin observed for one check in one cell. Margins are
/// `lhs − rhs` of the inequality, so a check passes when the margin is at
/// least `−tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub check: &'static str,
    pub family: String,
    pub n: f64,
    pub z: f64,
    pub eta: f64,
    pub sequences: usize,
    pub min_margin: f64,
    pub tolerance: f64,
}

impl CellResult {
    pub fn pass(&self) -> bool {
        self.min_margin >= -self.tolerance
    }
}

pub const CORPUS_SCHEMA: &str = "dnp-corpus/v1";
pub const CORPUS_HEADER: &str = "check,family,n,z,eta,sequences,min_margin,tolerance,pass";

pub fn corpus_csv(rows: &[CellResult]) -> String {
    let mut out = format!("{CORPUS_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.check,
            r.family,
            r.n,
            r.z,
            r.eta,
            r.sequences,
            r.min_margin + 0.0,
            r.tolerance,
            r.pass()
        );
    }
    out
}

struct Tracker {
    rows: Vec<CellResult>,
}

impl Tracker {
    #[allow(clippy::too_many_arguments)]
    fn record(&mut self, check: &'static str, family: String, n: f64, z: f64, eta: f64, margin: f64, tol: f64) {
        if let Some(row) = self
            .rows
            .iter_mut()
            .find(|r| r.check == check && r.family == family && r.n == n && r.z == z && r.eta == eta)
        {
            row.sequences += 1;
            row.min_margin = row.min_margin.min(margin);
        } else {
            self.rows.push(CellResult {
                check,
                family,
                n,
                z,
                eta,
                sequences: 1,
                min_margin: margin,
                tolerance: tol,
            });
        }
    }
}

/// Margins of the deviation bounds `−1 ≤ x ≤ U + 1` and `|Δx| ≤ 2`.
pub fn deviation_margins(run: &PredictorRun) -> (f64, f64, f64) {
    let u = run.threshold;
    let lower = run.deviations.iter().fold(f64::INFINITY, |m, &x| m.min(x + 1.0));
    let upper = run.deviations.iter().fold(f64::INFINITY, |m, &x| m.min(u + 1.0 - x));
    let step = run
        .deviations
        .windows(2)
        .fold(f64::INFINITY, |m, w| m.min(2.0 - (w[1] - w[0]).abs()));
    (lower, upper, step)
}

/// Minimum margins of `g(x)(b − b̃) ≥ 0` and `g(x)(b − b̃) ≥ b − b̃` over rounds with `b ≠ b̃`.
pub fn pointwise_margins(run: &PredictorRun, bits: &[f64]) -> (f64, f64) {
    let mut m1 = f64::INFINITY;
    let mut m2 = f64::INFINITY;
    for ((&b, p), br) in bits.iter().zip(&run.predictions).zip(&run.branches) {
        if *br == Branch::Ignored && b != 0.0 {
            let diff = b;
            m1 = m1.min(p * diff);
            m2 = m2.min(p * diff - diff);
        }
    }
    (m1, m2)
}

/// Whether replaying the plain predictor on the transformed bits reproduces
/// the conservative run exactly (bitwise).
pub fn transformed_equivalence(confidence: Confidence, run: &PredictorRun, bits: &[f64]) -> Result<bool> {
    let transformed = run.transformed_bits(bits);
    let replay = run_with(
        PredictorState::with_confidence(confidence, UpdateMode::Plain),
        &transformed,
    )?;
    let same_x = replay
        .deviations
        .iter()
        .zip(&run.deviations)
        .all(|(a, b)| a.to_bits() == b.to_bits());
    let same_g = replay
        .predictions
        .iter()
        .zip(&run.predictions)
        .all(|(a, b)| a.to_bits() == b.to_bits());
    Ok(same_x && same_g)
}

/// Potential term `Σ_t η^{T−t}/n·(x_t g(x_t)/2 − Φ_t)` with `Φ_t` integrated incrementally.
pub fn potential_term(confidence: &Confidence, run: &PredictorRun, eta: f64) -> f64 {
    let n = confidence.params().n();
    let t = run.predictions.len();
    let mut phi = 0.0;
    let mut terms = Vec::with_capacity(t);
    for i in 0..t {
        if i > 0 {
            phi += confidence.integral(run.deviations[i - 1], run.deviations[i]);
        }
        let x = run.deviations[i];
        terms.push((x * run.predictions[i] / 2.0 - phi) / n);
    }
    discounted_sum(&terms, eta)
}

/// Runs the whole corpus and returns one row per (check, family, n, Z, η) cell.
pub fn run_corpus(config: &CorpusConfig) -> Result<Vec<CellResult>> {
    if config.cells.is_empty() && config.half_chord_cells.is_empty() && config.geometric_cells.is_empty() {
        return Err(invalid("corpus", "no cells to check"));
    }
    if !config.cells.is_empty() && (config.families.is_empty() || config.etas.is_empty()) {
        return Err(invalid("corpus", "payoff cells need at least one family and one eta"));
    }
    let mut tracker = Tracker { rows: Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    for &(n, z) in &config.cells {
        let params = ConfidenceParams::new(n, z)?;
        let confidence = Confidence::new(params)?;
        let rho = params.rho();
        let u = confidence.threshold();
        for &family in &config.families {
            let count = if family.is_deterministic() {
                1
            } else {
                config.sequences_per_family
            };
            let label = family.to_string();
            for _ in 0..count {
                let (bits, run) = play(confidence, UpdateMode::Conservative, family, config.horizon, &mut rng)?;
                for eta_choice in &config.etas {
                    let eta = eta_choice.resolve(rho);
                    let payoff = discounted_payoff(&run.predictions, &bits, eta)?;
                    tracker.record(
                        "payoff-any-eta",
                        label.clone(),
                        n,
                        z,
                        eta,
                        payoff + z / (2.0 * (1.0 - eta)),
                        PAYOFF_TOL,
                    );
                }
                let payoff_rho = discounted_payoff(&run.predictions, &bits, rho)?;
                let tracking = discounted_sum(&bits, rho) - z / (2.0 * (1.0 - rho)) - u - 1.0;
                tracker.record(
                    "payoff-tracking",
                    label.clone(),
                    n,
                    z,
                    rho,
                    payoff_rho - tracking,
                    PAYOFF_TOL,
                );

                let (lo, hi, step) = deviation_margins(&run);
                tracker.record("deviation-lower", label.clone(), n, z, rho, lo, PAYOFF_TOL);
                tracker.record("deviation-upper", label.clone(), n, z, rho, hi, PAYOFF_TOL);
                tracker.record("deviation-step", label.clone(), n, z, rho, step, PAYOFF_TOL);

                let (m1, m2) = pointwise_margins(&run, &bits);
                if m1.is_finite() {
                    tracker.record("ignored-bit-nonneg", label.clone(), n, z, rho, m1, PAYOFF_TOL);
                    tracker.record("ignored-bit-dominates", label.clone(), n, z, rho, m2, PAYOFF_TOL);
                }
                let same = transformed_equivalence(confidence, &run, &bits)?;
                tracker.record(
                    "transformed-equivalence",
                    label.clone(),
                    n,
                    z,
                    rho,
                    if same { 0.0 } else { -1.0 },
                    0.0,
                );
            }
        }

        // Plain predictor with the potential-augmented bounds.
        for _ in 0..config.plain_sequences {
            let (bits, run) = play(
                confidence,
                UpdateMode::Plain,
                BitFamily::UniformReal,
                config.plain_horizon,
                &mut rng,
            )?;
            let label = "plain-uniform-real".to_string();
            for eta_choice in &config.etas {
                let eta = eta_choice.resolve(rho);
                if eta < rho {
                    continue;
                }
                let payoff = discounted_payoff(&run.predictions, &bits, eta)?;
                let rhs = potential_term(&confidence, &run, eta) - z / (2.0 * (1.0 - eta));
                tracker.record(
                    "potential-any-eta",
                    label.clone(),
                    n,
                    z,
                    eta,
                    payoff - rhs,
                    POTENTIAL_TOL,
                );
            }
            let payoff = discounted_payoff(&run.predictions, &bits, rho)?;
            let last = *run.deviations.last().expect("nonempty");
            let rhs =
                discounted_sum(&bits, rho) + potential_term(&confidence, &run, rho) - z / (2.0 * (1.0 - rho)) - last;
            tracker.record("potential-tracking", label, n, z, rho, payoff - rhs, POTENTIAL_TOL);
        }
    }

    for &(n, z) in &config.half_chord_cells {
        let margin = potential_grid_margin(
            &Confidence::new(ConfidenceParams::new(n, z)?)?,
            config.half_chord_points,
        );
        tracker.record(
            "potential-half-chord",
            "grid".into(),
            n,
            z,
            1.0 - 1.0 / n,
            margin,
            HALF_CHORD_TOL,
        );
    }

    for &(n, t) in &config.geometric_cells {
        let params = ConfidenceParams::new(n, 1.0 / t)?;
        let confidence = Confidence::new(params)?;
        let u = confidence.threshold();
        let c = u - 8.0;
        let margin = c - u * confidence.value(c) - 1.0;
        tracker.record(
            "geometric-chord",
            format!("T={t}"),
            n,
            1.0 / t,
            params.rho(),
            margin,
            0.0,
        );
    }
    Ok(tracker.rows)
}

/// `min_x (x·g(x)/2 − Φ(x))` over `points` evenly spaced `x ∈ [−1, U + 1]`.
pub fn potential_grid_margin(confidence: &Confidence, points: usize) -> f64 {
    let u = confidence.threshold();
    let (a, b) = (-1.0, u + 1.0);
    let h = (b - a) / (points - 1) as f64;
    let mut phi = 0.0;
    let mut prev = a;
    let mut margin = f64::INFINITY;
    for i in 0..points {
        let x = a + i as f64 * h;
        phi += confidence.integral(prev, x);
        prev = x;
        margin = margin.min(x * confidence.value(x) / 2.0 - phi);
    }
    margin
}

#[cfg(test)]
mod tests {
    use super::*;

    fn confidence() -> Confidence {
        Confidence::new(ConfidenceParams::new(256.0, 1.0 / 1024.0).unwrap()).unwrap()
    }

    #[test]
    fn anti_predictor_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(BitFamily::AntiPredictor.next_bit(&mut rng, 0.0), -1.0);
        assert_eq!(BitFamily::AntiPredictor.next_bit(&mut rng, 0.4), -1.0);
        assert_eq!(BitFamily::Oscillating.next_bit(&mut rng, 0.0), 1.0);
    }

    #[test]
    fn transformed_bits_replay_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for family in [BitFamily::Biased(0.8), BitFamily::Rademacher, BitFamily::Oscillating] {
            let (bits, run) = play(confidence(), UpdateMode::Conservative, family, 5000, &mut rng).unwrap();
            assert!(transformed_equivalence(confidence(), &run, &bits).unwrap());
        }
    }

    #[test]
    fn biased_sequences_exercise_ignore_branch() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (bits, run) = play(
            confidence(),
            UpdateMode::Conservative,
            BitFamily::Biased(0.9),
            5000,
            &mut rng,
        )
        .unwrap();
        let (m1, m2) = pointwise_margins(&run, &bits);
        assert!(m1.is_finite(), "ignore branch never fired");
        assert!(m1 >= 0.0 && m2 >= -1e-12);
        let (lo, hi, step) = deviation_margins(&run);
        assert!(lo >= 0.0 && hi >= 0.0 && step >= 0.0);
    }

    #[test]
    fn small_corpus_passes() {
        let cfg = CorpusConfig {
            cells: vec![(256.0, 1.0 / 1024.0)],
            sequences_per_family: 5,
            horizon: 3000,
            plain_sequences: 5,
            plain_horizon: 1000,
            half_chord_points: 500,
            ..CorpusConfig::default()
        };
        let rows = run_corpus(&cfg).unwrap();
        for r in &rows {
            assert!(r.pass(), "{r:?}");
        }
        let csv = corpus_csv(&rows);
        assert_eq!(csv.lines().next(), Some(CORPUS_HEADER));
        assert_eq!(csv.lines().count(), rows.len() + 1);
    }

    #[test]
    fn empty_corpus_rejected() {
        let cfg = CorpusConfig {
            cells: vec![],
            half_chord_cells: vec![],
            geometric_cells: vec![],
            ..CorpusConfig::default()
        };
        assert!(run_corpus(&cfg).is_err());
    }
}
