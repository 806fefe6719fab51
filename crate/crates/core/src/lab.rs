//! Regret laboratory: discounted losses, hindsight comparators, the
//! smoothed-average decomposition across discounts, and closed-form bound checks.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::domain::{distance, dot, norm, Domain, ProblemBounds};
use crate::error::{invalid, Error, Result};
use crate::loss::Loss;

/// Slack added on top of the comparator error bound in every check.
pub const CHECK_SLACK: f64 = 1e-6;

/// Weights `λ^{horizon−t}` for `t = 1..=horizon`, built back to front.
pub fn discount_weights(lambda: f64, horizon: usize) -> Vec<f64> {
    let mut w = vec![0.0; horizon];
    let mut acc = 1.0;
    for slot in w.iter_mut().rev() {
        *slot = acc;
        acc *= lambda;
    }
    w
}

/// `Σ_{t≤horizon} λ^{horizon−t} f_t(decisions[t])`.
pub fn discounted_loss(decisions: &[Vec<f64>], losses: &[Loss], lambda: f64, horizon: usize) -> Result<f64> {
    if horizon > decisions.len() || horizon > losses.len() {
        return Err(invalid(
            "horizon",
            format!(
                "{horizon} exceeds available rounds ({}, {})",
                decisions.len(),
                losses.len()
            ),
        ));
    }
    let mut weight = 1.0;
    let mut acc = 0.0;
    for t in (0..horizon).rev() {
        acc += weight * losses[t].value(&decisions[t]);
        weight *= lambda;
    }
    Ok(acc)
}

/// Best fixed decision in hindsight.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparator {
    pub point: Vec<f64>,
    pub value: f64,
    /// Certified upper bound on `value − min`.
    pub error_bound: f64,
}

fn weighted_value(losses: &[Loss], weights: &[f64], w: &[f64]) -> f64 {
    losses.iter().zip(weights).map(|(l, a)| a * l.value(w)).sum()
}

fn weighted_gradient(losses: &[Loss], weights: &[f64], w: &[f64]) -> Vec<f64> {
    let mut s = vec![0.0; w.len()];
    for (l, a) in losses.iter().zip(weights) {
        for (si, gi) in s.iter_mut().zip(l.gradient(w)) {
            *si += a * gi;
        }
    }
    s
}

/// `max_{u ∈ ball} ⟨s, w − u⟩`, an upper bound on `F(w) − min F` for any subgradient `s` of `F` at `w`.
fn linearisation_gap(domain: &Domain, w: &[f64], s: &[f64]) -> f64 {
    let centred: Vec<f64> = w.iter().zip(domain.center()).map(|(a, c)| a - c).collect();
    (dot(s, &centred) + domain.radius() * norm(s)).max(0.0)
}

/// Minimiser of `Σ_t λ^{horizon−t} f_t(w)` over the ball.
///
/// Exact for all-linear losses (closed form) and 1-d absolute losses
/// (weighted median). Absolute losses in higher dimension use Weiszfeld
/// iterations with a certified gap; anything else falls back to a projected
/// grid search with `grid_points` per axis.
pub fn best_comparator(
    losses: &[Loss],
    domain: &Domain,
    bounds: &ProblemBounds,
    lambda: f64,
    horizon: usize,
    grid_points: usize,
) -> Result<Comparator> {
    if horizon == 0 || horizon > losses.len() {
        return Err(invalid("horizon", format!("must lie in 1..={}", losses.len())));
    }
    let losses = &losses[..horizon];
    let weights = discount_weights(lambda, horizon);
    if losses.iter().all(|l| matches!(l, Loss::Linear { .. })) {
        return Ok(linear_comparator(losses, &weights, domain));
    }
    if losses.iter().all(|l| matches!(l, Loss::Absolute { .. })) {
        return Ok(if domain.dim() == 1 {
            median_comparator(losses, &weights)
        } else {
            weiszfeld_comparator(losses, &weights, domain)
        });
    }
    grid_comparator(losses, &weights, domain, bounds, grid_points)
}

fn linear_comparator(losses: &[Loss], weights: &[f64], domain: &Domain) -> Comparator {
    let dim = domain.dim();
    let mut s = vec![0.0; dim];
    let mut constant = 0.0;
    for (l, a) in losses.iter().zip(weights) {
        if let Loss::Linear { gradient, offset } = l {
            for (si, gi) in s.iter_mut().zip(gradient) {
                *si += a * gi;
            }
            constant += a * offset;
        }
    }
    let sn = norm(&s);
    let point: Vec<f64> = if sn == 0.0 {
        domain.center().to_vec()
    } else {
        domain
            .center()
            .iter()
            .zip(&s)
            .map(|(c, si)| c - domain.radius() * si / sn)
            .collect()
    };
    let value = dot(&s, domain.center()) - domain.radius() * sn + constant;
    Comparator {
        point,
        value,
        error_bound: 0.0,
    }
}

/// Groups identical targets so repeated segments cost one term.
fn aggregate_targets(losses: &[Loss], weights: &[f64]) -> Vec<(Vec<f64>, f64)> {
    let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
    for (l, a) in losses.iter().zip(weights) {
        if let Loss::Absolute { target, scale } = l {
            match out.last_mut() {
                Some((t, w)) if t == target => *w += a * scale,
                _ => out.push((target.clone(), a * scale)),
            }
        }
    }
    out
}

fn median_comparator(losses: &[Loss], weights: &[f64]) -> Comparator {
    let mut pts: Vec<(f64, f64)> = aggregate_targets(losses, weights)
        .into_iter()
        .map(|(t, w)| (t[0], w))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pts.iter().map(|p| p.1).sum();
    let mut cum = 0.0;
    let mut median = pts[0].0;
    for &(x, w) in &pts {
        cum += w;
        if cum >= 0.5 * total {
            median = x;
            break;
        }
    }
    let point = vec![median];
    let value = pts.iter().map(|(x, w)| w * (median - x).abs()).sum();
    Comparator {
        point,
        value,
        error_bound: 0.0,
    }
}

/// Minimum-norm subgradient of `Σ w_k ‖x − p_k‖` at `x`.
fn median_subgradient(points: &[(Vec<f64>, f64)], x: &[f64]) -> Vec<f64> {
    let mut grad = vec![0.0; x.len()];
    let mut at_point = 0.0;
    for (p, w) in points {
        let d = distance(x, p);
        if d == 0.0 {
            at_point += w;
        } else {
            for ((g, xi), pi) in grad.iter_mut().zip(x).zip(p) {
                *g += w * (xi - pi) / d;
            }
        }
    }
    let gn = norm(&grad);
    if at_point > 0.0 {
        if gn <= at_point {
            return vec![0.0; x.len()];
        }
        let shrink = (gn - at_point) / gn;
        grad.iter_mut().for_each(|g| *g *= shrink);
    }
    grad
}

fn weiszfeld_comparator(losses: &[Loss], weights: &[f64], domain: &Domain) -> Comparator {
    let points = aggregate_targets(losses, weights);
    let total: f64 = points.iter().map(|p| p.1).sum();
    let dim = domain.dim();
    let eval = |x: &[f64]| -> f64 { points.iter().map(|(p, w)| w * distance(x, p)).sum() };

    let mut x = vec![0.0; dim];
    for (p, w) in &points {
        for (xi, pi) in x.iter_mut().zip(p) {
            *xi += w * pi / total;
        }
    }
    // Start from the best of the mean and the data points.
    let mut best_val = eval(&x);
    for (p, _) in &points {
        let v = eval(p);
        if v < best_val {
            best_val = v;
            x = p.clone();
        }
    }
    for _ in 0..5000 {
        let mut num = vec![0.0; dim];
        let mut den = 0.0;
        let mut hit = false;
        for (p, w) in &points {
            let d = distance(&x, p);
            if d < 1e-15 {
                hit = true;
                continue;
            }
            for (ni, pi) in num.iter_mut().zip(p) {
                *ni += w * pi / d;
            }
            den += w / d;
        }
        if den == 0.0 {
            break;
        }
        let next: Vec<f64> = num.iter().map(|n| n / den).collect();
        let v = eval(&next);
        if v >= best_val - 1e-15 * total.max(1.0) && !hit {
            if v < best_val {
                best_val = v;
                x = next;
            }
            break;
        }
        if v < best_val {
            best_val = v;
            x = next;
        } else {
            break;
        }
    }
    let grad = median_subgradient(&points, &x);
    // The geometric median lies in the convex hull of the targets, hence in the ball.
    let point = domain.project(&x).expect("dimension checked");
    let value = eval(&point);
    Comparator {
        error_bound: linearisation_gap(domain, &point, &grad) + (value - best_val).abs(),
        point,
        value,
    }
}

/// Projected grid search with `m` points per axis followed by projected
/// subgradient refinement. The error bound is the smaller of the grid
/// resolution bound `G·Σλ^{·}·h·√d/2` and the linearisation gap at the result.
pub fn grid_comparator(
    losses: &[Loss],
    weights: &[f64],
    domain: &Domain,
    bounds: &ProblemBounds,
    m: usize,
) -> Result<Comparator> {
    if m < 2 {
        return Err(invalid("grid_points", "need at least 2 points per axis"));
    }
    let dim = domain.dim();
    let total = (m as f64).powi(dim as i32);
    if total > 4e6 {
        return Err(invalid("grid_points", format!("{m}^{dim} grid points is too many")));
    }
    let r = domain.radius();
    let spacing = 2.0 * r / (m - 1) as f64;
    let mut idx = vec![0usize; dim];
    let mut best = (f64::INFINITY, domain.center().to_vec());
    loop {
        let raw: Vec<f64> = idx
            .iter()
            .zip(domain.center())
            .map(|(&i, c)| c - r + i as f64 * spacing)
            .collect();
        let p = domain.project(&raw)?;
        let v = weighted_value(losses, weights, &p);
        if v < best.0 {
            best = (v, p);
        }
        let mut k = 0;
        loop {
            if k == dim {
                break;
            }
            idx[k] += 1;
            if idx[k] < m {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == dim {
            break;
        }
    }
    let (mut value, mut point) = best;
    let mass: f64 = weights.iter().sum();
    let mut step = spacing;
    for _ in 0..200 {
        let s = weighted_gradient(losses, weights, &point);
        let sn = norm(&s);
        if sn == 0.0 {
            break;
        }
        let cand: Vec<f64> = point.iter().zip(&s).map(|(p, g)| p - step * g / sn).collect();
        let cand = domain.project(&cand)?;
        let v = weighted_value(losses, weights, &cand);
        if v < value {
            value = v;
            point = cand;
        } else {
            step *= 0.5;
        }
    }
    let grid_bound = bounds.g * mass * spacing * (dim as f64).sqrt() / 2.0;
    let gap = linearisation_gap(domain, &point, &weighted_gradient(losses, weights, &point));
    Ok(Comparator {
        point,
        value,
        error_bound: grid_bound.min(gap),
    })
}

/// `s_k^λ = (1−λ)·Σ_{t≤k} λ^{k−t} s_t` for `k = 1..=T`.
pub fn smoothed_averages(s: &[f64], lambda: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(s.len());
    let mut acc = 0.0;
    for &v in s {
        acc = lambda * acc + (1.0 - lambda) * v;
        out.push(acc);
    }
    out
}

/// A `λ₁`-smoothed average written as a mixture of `λ₂`-smoothed prefix averages.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// `coefficients[j]` multiplies `s_{T−j}^{λ₂}`, `j = 0..T−1`.
    pub coefficients: Vec<f64>,
    pub reconstructed: f64,
    /// Mass `(λ₁−λ₂)·λ₁^{T−1}/(1−λ₂)` that would sit on the empty prefix.
    pub truncation_mass: f64,
}

/// Coefficients `(1−λ₁)/(1−λ₂)` for `j = 0` and
/// `(1−λ₁)(λ₁−λ₂)λ₁^{j−1}/(1−λ₂)` for `j ≥ 1`.
pub fn smoothed_average_decompose(s: &[f64], lambda1: f64, lambda2: f64) -> Result<Decomposition> {
    if !(0.0 < lambda2 && lambda2 < lambda1 && lambda1 < 1.0) {
        return Err(invalid(
            "lambda",
            format!("need 0 < lambda2 < lambda1 < 1, got ({lambda1}, {lambda2})"),
        ));
    }
    let t = s.len();
    let averages = smoothed_averages(s, lambda2);
    let lead = (1.0 - lambda1) / (1.0 - lambda2);
    let mut coefficients = Vec::with_capacity(t);
    let mut power = 1.0;
    for j in 0..t {
        if j == 0 {
            coefficients.push(lead);
        } else {
            coefficients.push(lead * (lambda1 - lambda2) * power);
            power *= lambda1;
        }
    }
    // `power` is now λ₁^{T−1} (or 1 for T ≤ 1).
    let truncation_mass = if t == 0 {
        1.0
    } else {
        (lambda1 - lambda2) * power / (1.0 - lambda2)
    };
    let reconstructed = coefficients
        .iter()
        .enumerate()
        .map(|(j, c)| c * averages[t - 1 - j])
        .sum();
    Ok(Decomposition {
        coefficients,
        reconstructed,
        truncation_mass,
    })
}

/// Closed-form bounds the lab can check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// OGD tuned to `λ`: `√2·GD/√(1−λ)`.
    Thm1,
    /// SOGD at a grid discount `λ_i`.
    Eq29Grid,
    /// SOGD at any `λ ∈ [1−1/τ, 1−1/T]`.
    Thm3Uniform,
    /// Combiner against its first stream, evaluated at `λ₁`.
    CombinerVsE1,
    /// Combiner against its second stream, evaluated at the predictor discount `λ₂`.
    CombinerVsE2,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::Thm1 => "thm1",
            BoundKind::Eq29Grid => "eq29-grid",
            BoundKind::Thm3Uniform => "thm3-uniform",
            BoundKind::CombinerVsE1 => "combiner-vs-e1",
            BoundKind::CombinerVsE2 => "combiner-vs-e2",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            BoundKind::Thm1,
            BoundKind::Eq29Grid,
            BoundKind::Thm3Uniform,
            BoundKind::CombinerVsE1,
            BoundKind::CombinerVsE2,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| Error::Unknown {
            what: "bound formula",
            name: s.to_string(),
        })
    }
}

/// Run constants a bound formula may need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub bounds: ProblemBounds,
    pub lambda: f64,
    /// Predictor scale `Z` (unused by `thm1`).
    pub z: f64,
    /// Grid size `N` (so `N + 1` experts).
    pub grid_n: u32,
    /// Threshold `U(n)` of the predictor (only `combiner-vs-e2`).
    pub threshold: f64,
}

impl BoundInputs {
    pub fn ogd(bounds: ProblemBounds, lambda: f64) -> Self {
        Self {
            bounds,
            lambda,
            z: f64::NAN,
            grid_n: 0,
            threshold: f64::NAN,
        }
    }

    pub fn sogd(bounds: ProblemBounds, lambda: f64, z: f64, grid_n: u32) -> Self {
        Self {
            bounds,
            lambda,
            z,
            grid_n,
            threshold: f64::NAN,
        }
    }
}

pub fn bound_value(kind: BoundKind, p: &BoundInputs) -> Result<f64> {
    if !(p.lambda > 0.0 && p.lambda < 1.0) {
        return Err(invalid("lambda", format!("must lie in (0, 1), got {}", p.lambda)));
    }
    let gd = p.bounds.gd();
    let gap = 1.0 - p.lambda;
    let log_inv_z = || (1.0 / p.z).ln();
    let experts = f64::from(p.grid_n) + 1.0;
    Ok(match kind {
        BoundKind::Thm1 => std::f64::consts::SQRT_2 * gd / gap.sqrt(),
        BoundKind::Eq29Grid => {
            gd / gap.sqrt() * (4.0 * log_inv_z().sqrt() + std::f64::consts::SQRT_2)
                + gd * experts * p.z / (2.0 * gap)
                + gd
        }
        BoundKind::Thm3Uniform => {
            2.0 * gd / gap.sqrt() * (4.0 * log_inv_z().sqrt() + std::f64::consts::SQRT_2)
                + gd * experts * p.z / gap
                + 2.0 * gd
        }
        BoundKind::CombinerVsE1 => gd * p.z / (2.0 * gap),
        BoundKind::CombinerVsE2 => gd * (p.z / (2.0 * gap) + p.threshold + 1.0),
    })
}

/// One bound check: `pass ⇔ regret ≤ bound + slack`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    pub lambda: f64,
    pub learner_loss: f64,
    pub comparator_loss: f64,
    pub regret: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
    pub horizon: usize,
    pub kind: BoundKind,
}

pub fn check_bound(
    kind: BoundKind,
    inputs: &BoundInputs,
    learner_loss: f64,
    comparator_loss: f64,
    comparator_error: f64,
    horizon: usize,
) -> Result<RegretReport> {
    let bound = bound_value(kind, inputs)?;
    let regret = learner_loss - comparator_loss;
    let slack = comparator_error + CHECK_SLACK;
    Ok(RegretReport {
        lambda: inputs.lambda,
        learner_loss,
        comparator_loss,
        regret,
        bound,
        slack,
        pass: regret <= bound + slack,
        horizon,
        kind,
    })
}

/// Discounted regret of `decisions` against the hindsight comparator, checked
/// against `kind`.
pub fn evaluate(
    kind: BoundKind,
    inputs: &BoundInputs,
    decisions: &[Vec<f64>],
    losses: &[Loss],
    domain: &Domain,
    horizon: usize,
) -> Result<RegretReport> {
    let learner = discounted_loss(decisions, losses, inputs.lambda, horizon)?;
    let comparator = best_comparator(losses, domain, &inputs.bounds, inputs.lambda, horizon, 64)?;
    check_bound(kind, inputs, learner, comparator.value, comparator.error_bound, horizon)
}

/// Header of the report CSV; bump the version when columns change.
pub const REPORT_SCHEMA: &str = "regret-report/v1";
pub const REPORT_HEADER: &str = "lambda,regret,bound,slack,pass,horizon,seed,generator";

impl RegretReport {
    pub fn csv_row(&self, seed: u64, generator: &str) -> String {
        let mut row = String::new();
        let _ = write!(
            row,
            "{},{},{},{},{},{},{},{}",
            self.lambda, self.regret, self.bound, self.slack, self.pass, self.horizon, seed, generator
        );
        row
    }
}
