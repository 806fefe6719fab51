//! Smoothed OGD: OGD experts on a geometric grid of discounts, chained
//! through combiners in descending discount order.

use std::f64::consts::E;
use std::fmt::Write as _;

use crate::combiner::CombinerState;
use crate::domain::{Domain, ProblemBounds};
use crate::error::{invalid, Result};
use crate::loss::LossSequence;
use crate::ogd::{step_size_for, OgdState};
use crate::special::{Confidence, ConfidenceParams};

/// Discounts `λ_i = 1 − 2^{i−1}/T` for `i = 1..=N+1`, `N = ⌈log₂(T/τ)⌉`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountGrid {
    pub horizon: usize,
    pub tau: usize,
    pub n: u32,
    pub lambdas: Vec<f64>,
}

impl DiscountGrid {
    pub fn build(horizon: usize, tau: usize) -> Result<Self> {
        if tau < 1 || tau > horizon {
            return Err(invalid(
                "tau",
                format!("need 1 <= tau <= T, got tau={tau}, T={horizon}"),
            ));
        }
        // Smallest N with τ·2^N ≥ T, i.e. ⌈log₂(T/τ)⌉ in exact integer arithmetic.
        let (t, tau_w) = (horizon as u128, tau as u128);
        let mut n = 0u32;
        while tau_w << n < t {
            n += 1;
        }
        if 1u128 << n >= t {
            return Err(invalid(
                "tau",
                format!("smallest grid discount 1 - 2^{n}/{horizon} is not positive"),
            ));
        }
        let lambdas = (0..=n).map(|k| 1.0 - (1u64 << k) as f64 / horizon as f64).collect();
        Ok(Self {
            horizon,
            tau,
            n,
            lambdas,
        })
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Interval `[1 − 1/τ, 1 − 1/T]` the grid is meant to cover.
    pub fn interval(&self) -> (f64, f64) {
        (1.0 - 1.0 / self.tau as f64, 1.0 - 1.0 / self.horizon as f64)
    }
}

/// Whether `τ ≥ max{16e, 32 log(1/Z)}`, under which the uniform bound is guaranteed.
pub fn regime_satisfied(tau: usize, z: f64) -> bool {
    tau as f64 >= (16.0 * E).max(32.0 * (1.0 / z).ln())
}

/// Snapshot of one round, taken before any update.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub decision: Vec<f64>,
    /// `v_{t,0} (baseline), v_{t,1}, …, v_{t,N+1}`
    pub chain: Vec<Vec<f64>>,
    /// `w_{t,i}` for each expert.
    pub experts: Vec<Vec<f64>>,
    pub omegas: Vec<f64>,
    pub deviations: Vec<f64>,
    /// Bits `ℓ_{t,i}` fed to each combiner after the round's loss was revealed.
    pub bits: Vec<f64>,
}

/// The expert chain `A_1..A_{N+1}`, `B_1..B_{N+1}` over a fixed baseline `B_0`.
#[derive(Debug, Clone)]
pub struct ExpertStack {
    grid: DiscountGrid,
    baseline: Vec<f64>,
    experts: Vec<OgdState>,
    combiners: Vec<CombinerState>,
    z: f64,
}

impl ExpertStack {
    /// Baseline is the domain centre.
    pub fn new(grid: DiscountGrid, z: f64, domain: &Domain, bounds: ProblemBounds) -> Result<Self> {
        let mut experts = Vec::with_capacity(grid.len());
        let mut combiners = Vec::with_capacity(grid.len());
        for &lambda in &grid.lambdas {
            let eta = step_size_for(lambda, &bounds)?;
            experts.push(OgdState::new(domain.clone(), bounds, eta, domain.center().to_vec())?);
            let confidence = Confidence::new(ConfidenceParams::from_discount(lambda, z)?)?;
            combiners.push(CombinerState::with_confidence(confidence, bounds));
        }
        Ok(Self {
            grid,
            baseline: domain.center().to_vec(),
            experts,
            combiners,
            z,
        })
    }

    pub fn grid(&self) -> &DiscountGrid {
        &self.grid
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn baseline(&self) -> &[f64] {
        &self.baseline
    }

    pub fn experts(&self) -> &[OgdState] {
        &self.experts
    }

    pub fn combiners(&self) -> &[CombinerState] {
        &self.combiners
    }

    /// Current output `v_{N+1}` without advancing.
    pub fn current_decision(&self) -> Result<Vec<f64>> {
        Ok(self.chain()?.pop().expect("chain is never empty"))
    }

    fn chain(&self) -> Result<Vec<Vec<f64>>> {
        let mut chain = Vec::with_capacity(self.experts.len() + 1);
        chain.push(self.baseline.clone());
        for (expert, combiner) in self.experts.iter().zip(&self.combiners) {
            let prev = chain.last().expect("baseline present");
            let next = combiner.combine(prev, expert.decision())?;
            chain.push(next);
        }
        Ok(chain)
    }

    /// Plays round `t`: combines pre-round iterates, reveals the loss at the
    /// output, then advances every expert on its own gradient and every
    /// combiner on `(f(v_{i−1}), f(w_i))`.
    pub fn round(&mut self, t: usize, losses: &mut LossSequence) -> Result<RoundRecord> {
        let chain = self.chain()?;
        let experts: Vec<Vec<f64>> = self.experts.iter().map(|e| e.decision().to_vec()).collect();
        let omegas = self.combiners.iter().map(|c| c.omega()).collect();
        let deviations = self.combiners.iter().map(|c| c.predictor().deviation()).collect();
        let decision = chain.last().expect("chain is never empty").clone();
        let loss = losses.reveal(t, &decision)?.clone();

        for (expert, w) in self.experts.iter_mut().zip(&experts) {
            expert.step(&loss.gradient(w))?;
        }
        let mut bits = Vec::with_capacity(self.combiners.len());
        for (i, combiner) in self.combiners.iter_mut().enumerate() {
            bits.push(combiner.feed_losses(loss.value(&chain[i]), loss.value(&experts[i]))?);
        }
        Ok(RoundRecord {
            decision,
            chain,
            experts,
            omegas,
            deviations,
            bits,
        })
    }
}

/// A completed SOGD run.
#[derive(Debug, Clone)]
pub struct SogdRun {
    pub grid: DiscountGrid,
    pub z: f64,
    pub regime_ok: bool,
    pub rounds: Vec<RoundRecord>,
}

impl SogdRun {
    pub fn decisions(&self) -> Vec<Vec<f64>> {
        self.rounds.iter().map(|r| r.decision.clone()).collect()
    }

    /// Decisions of expert `i` (0-based).
    pub fn expert_decisions(&self, i: usize) -> Vec<Vec<f64>> {
        self.rounds.iter().map(|r| r.experts[i].clone()).collect()
    }

    /// Outputs of combiner level `k` (0 is the baseline).
    pub fn chain_decisions(&self, k: usize) -> Vec<Vec<f64>> {
        self.rounds.iter().map(|r| r.chain[k].clone()).collect()
    }

    /// `t,omega_1,…,omega_{N+1}`
    pub fn omega_trace_csv(&self) -> String {
        self.level_trace("omega", |r| &r.omegas)
    }

    /// `t,x_1,…,x_{N+1}`
    pub fn deviation_trace_csv(&self) -> String {
        self.level_trace("x", |r| &r.deviations)
    }

    /// `t,l_1,…,l_{N+1}`: bits fed to each combiner.
    pub fn bit_trace_csv(&self) -> String {
        self.level_trace("l", |r| &r.bits)
    }

    fn level_trace(&self, name: &str, column: impl Fn(&RoundRecord) -> &Vec<f64>) -> String {
        let mut out = String::from("t");
        for i in 1..=self.grid.len() {
            let _ = write!(out, ",{name}_{i}");
        }
        out.push('\n');
        for (t, r) in self.rounds.iter().enumerate() {
            let _ = write!(out, "{}", t + 1);
            for v in column(r) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Runs SOGD over the whole horizon of `losses`.
pub fn run_sogd(tau: usize, z: f64, losses: &mut LossSequence) -> Result<SogdRun> {
    let grid = DiscountGrid::build(losses.horizon(), tau)?;
    let regime_ok = regime_satisfied(tau, z);
    let mut stack = ExpertStack::new(grid.clone(), z, &losses.domain().clone(), losses.bounds())?;
    let mut rounds = Vec::with_capacity(losses.horizon());
    for t in 0..losses.horizon() {
        rounds.push(stack.round(t, losses)?);
    }
    Ok(SogdRun {
        grid,
        z,
        regime_ok,
        rounds,
    })
}
