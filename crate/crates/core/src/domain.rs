//! Decision domain (a Euclidean ball), problem bounds and small vector helpers.

use crate::error::{invalid, Error, Result};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// A closed Euclidean ball `{w : ‖w − center‖ ≤ radius}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    center: Vec<f64>,
    radius: f64,
}

impl Domain {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(invalid("center", "dimension must be at least 1"));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid("radius", format!("must be positive, got {radius}")));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(invalid("center", "coordinates must be finite"));
        }
        Ok(Self { center, radius })
    }

    /// Ball of the given radius centred at the origin of `R^dim`.
    pub fn origin_ball(dim: usize, radius: f64) -> Result<Self> {
        Self::ball(vec![0.0; dim], radius)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Diameter `D = 2 · radius`.
    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    fn check_dim(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: point.len(),
            });
        }
        Ok(())
    }

    /// Membership test with an absolute tolerance on the radius.
    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        point.len() == self.dim() && distance(point, &self.center) <= self.radius + tol
    }

    /// Euclidean projection onto the ball.
    pub fn project(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(point)?;
        let dist = distance(point, &self.center);
        if dist <= self.radius {
            return Ok(point.to_vec());
        }
        let scale = self.radius / dist;
        Ok(self
            .center
            .iter()
            .zip(point)
            .map(|(c, p)| c + scale * (p - c))
            .collect())
    }
}

/// Global constants of the problem: gradient bound `G` and diameter `D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemBounds {
    pub g: f64,
    pub d: f64,
}

impl ProblemBounds {
    pub fn new(g: f64, d: f64) -> Result<Self> {
        if !(g.is_finite() && g > 0.0) {
            return Err(invalid("G", format!("must be positive, got {g}")));
        }
        if !(d.is_finite() && d > 0.0) {
            return Err(invalid("D", format!("must be positive, got {d}")));
        }
        Ok(Self { g, d })
    }

    /// Bounds for a domain, with `D` taken as the ball diameter.
    pub fn for_domain(g: f64, domain: &Domain) -> Result<Self> {
        Self::new(g, domain.diameter())
    }

    /// Upper end `GD` of the loss range.
    pub fn gd(&self) -> f64 {
        self.g * self.d
    }
}
