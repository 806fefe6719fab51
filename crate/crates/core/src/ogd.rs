//! Projected online gradient descent with a constant step size.

use crate::domain::{norm, Domain, ProblemBounds};
use crate::error::{invalid, Error, Result};
use crate::loss::LossSequence;

/// Step size `D·√(2(1−λ))/G` tuned to discount `λ`.
pub fn step_size_for(lambda: f64, bounds: &ProblemBounds) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(invalid("lambda", format!("must lie in (0, 1), got {lambda}")));
    }
    Ok(bounds.d * (2.0 * (1.0 - lambda)).sqrt() / bounds.g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OgdState {
    w: Vec<f64>,
    eta: f64,
    domain: Domain,
    bounds: ProblemBounds,
}

impl OgdState {
    pub fn new(domain: Domain, bounds: ProblemBounds, eta: f64, w_init: Vec<f64>) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(invalid("eta", format!("must be positive, got {eta}")));
        }
        if w_init.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: w_init.len(),
            });
        }
        if !domain.contains(&w_init, 1e-12) {
            return Err(invalid("w_init", "initial point outside the domain"));
        }
        Ok(Self {
            w: w_init,
            eta,
            domain,
            bounds,
        })
    }

    /// Expert for discount `λ`, started at the domain centre.
    pub fn for_discount(lambda: f64, domain: Domain, bounds: ProblemBounds) -> Result<Self> {
        let eta = step_size_for(lambda, &bounds)?;
        let start = domain.center().to_vec();
        Self::new(domain, bounds, eta, start)
    }

    pub fn decision(&self) -> &[f64] {
        &self.w
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `w ← Π[w − η·∇]`.
    pub fn step(&mut self, gradient: &[f64]) -> Result<()> {
        if gradient.len() != self.w.len() {
            return Err(Error::DimensionMismatch {
                expected: self.w.len(),
                got: gradient.len(),
            });
        }
        let gn = norm(gradient);
        if gn > self.bounds.g * (1.0 + 1e-12) {
            return Err(Error::GradientBound {
                norm: gn,
                bound: self.bounds.g,
            });
        }
        let moved: Vec<f64> = self.w.iter().zip(gradient).map(|(w, g)| w - self.eta * g).collect();
        self.w = self.domain.project(&moved)?;
        Ok(())
    }
}

/// Runs OGD tuned to `λ` and returns the decision played in every round.
pub fn run_ogd(lambda: f64, losses: &mut LossSequence, w_init: Vec<f64>) -> Result<Vec<Vec<f64>>> {
    let eta = step_size_for(lambda, &losses.bounds())?;
    let mut state = OgdState::new(losses.domain().clone(), losses.bounds(), eta, w_init)?;
    let mut decisions = Vec::with_capacity(losses.horizon());
    for t in 0..losses.horizon() {
        let w = state.decision().to_vec();
        let grad = losses.reveal(t, &w)?.gradient(&w);
        state.step(&grad)?;
        decisions.push(w);
    }
    Ok(decisions)
}
