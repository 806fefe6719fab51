//! Convex loss oracles and seeded synthetic loss environments.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::domain::{distance, dot, norm, Domain, ProblemBounds};
use crate::error::{invalid, Error, Result};

/// A single round's convex loss.
#[derive(Debug, Clone, PartialEq)]
pub enum Loss {
    /// `f(w) = scale · ‖w − target‖`.
    Absolute { target: Vec<f64>, scale: f64 },
    /// `f(w) = ⟨gradient, w⟩ + offset`.
    Linear { gradient: Vec<f64>, offset: f64 },
}

impl Loss {
    /// Linear loss `⟨g, w − w_min⟩` where `w_min` minimises it over the ball,
    /// so its values cover `[0, 2·radius·‖g‖]`.
    pub fn shifted_linear(gradient: Vec<f64>, domain: &Domain) -> Self {
        let offset = domain.radius() * norm(&gradient) - dot(&gradient, domain.center());
        Loss::Linear { gradient, offset }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        Loss::Linear {
            gradient: vec![0.0; dim],
            offset: value,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Loss::Absolute { target, .. } => target.len(),
            Loss::Linear { gradient, .. } => gradient.len(),
        }
    }

    pub fn value(&self, w: &[f64]) -> f64 {
        match self {
            Loss::Absolute { target, scale } => scale * distance(w, target),
            Loss::Linear { gradient, offset } => dot(gradient, w) + offset,
        }
    }

    /// A subgradient at `w`; the absolute loss returns zero at its kink.
    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        match self {
            Loss::Absolute { target, scale } => {
                let dist = distance(w, target);
                if dist == 0.0 {
                    vec![0.0; w.len()]
                } else {
                    w.iter().zip(target).map(|(a, b)| scale * (a - b) / dist).collect()
                }
            }
            Loss::Linear { gradient, .. } => gradient.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorKind {
    PiecewiseStationaryAbsolute,
    DriftingLinear,
    AdversarialWorstCase,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 3] = [
        GeneratorKind::PiecewiseStationaryAbsolute,
        GeneratorKind::DriftingLinear,
        GeneratorKind::AdversarialWorstCase,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            GeneratorKind::PiecewiseStationaryAbsolute => "piecewise-stationary-absolute",
            GeneratorKind::DriftingLinear => "drifting-linear",
            GeneratorKind::AdversarialWorstCase => "adversarial-worst-case",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GeneratorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Unknown {
                what: "generator kind",
                name: s.to_string(),
            })
    }
}

/// Reproducible description of a synthetic environment.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub horizon: usize,
    pub dim: usize,
    pub g: f64,
    pub radius: f64,
    pub seed: u64,
    /// 1-based rounds at which the piecewise-stationary target jumps.
    /// `None` selects segments of length `max(50, T/8)`.
    pub segments: Option<Vec<usize>>,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, horizon: usize, dim: usize, g: f64, radius: f64, seed: u64) -> Self {
        Self {
            kind,
            horizon,
            dim,
            g,
            radius,
            seed,
            segments: None,
        }
    }

    pub fn domain(&self) -> Result<Domain> {
        Domain::origin_ball(self.dim, self.radius)
    }

    pub fn bounds(&self) -> Result<ProblemBounds> {
        ProblemBounds::new(self.g, 2.0 * self.radius)
    }

    /// Jump rounds actually used by the piecewise-stationary generator.
    pub fn segment_starts(&self) -> Vec<usize> {
        match &self.segments {
            Some(s) => s.clone(),
            None => {
                let len = (self.horizon / 8).max(50);
                (1..).map(|k| 1 + k * len).take_while(|&r| r <= self.horizon).collect()
            }
        }
    }

    /// `key=value` lines describing this generator.
    pub fn to_config_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("kind={}", self.kind),
            format!("T={}", self.horizon),
            format!("d={}", self.dim),
            format!("G={}", self.g),
            format!("radius={}", self.radius),
            format!("seed={}", self.seed),
        ];
        if let Some(s) = &self.segments {
            let joined: Vec<String> = s.iter().map(|r| r.to_string()).collect();
            lines.push(format!("segments={}", joined.join(",")));
        }
        lines
    }

    /// Parses the output of [`GeneratorSpec::to_config_lines`]; `#` starts a comment.
    pub fn from_config(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut spec = GeneratorSpec::new(GeneratorKind::DriftingLinear, 1, 1, 1.0, 0.5, 0);
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                reason: format!("expected key=value, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Config {
                line: line_no,
                reason: format!("invalid {what} `{value}`"),
            };
            match key {
                "kind" => kind = Some(value.parse().map_err(|_| bad("kind"))?),
                "T" => spec.horizon = value.parse().map_err(|_| bad("T"))?,
                "d" => spec.dim = value.parse().map_err(|_| bad("d"))?,
                "G" => spec.g = value.parse().map_err(|_| bad("G"))?,
                "radius" => spec.radius = value.parse().map_err(|_| bad("radius"))?,
                "seed" => spec.seed = value.parse().map_err(|_| bad("seed"))?,
                "segments" => {
                    let parsed: std::result::Result<Vec<usize>, _> =
                        value.split(',').map(|s| s.trim().parse()).collect();
                    spec.segments = Some(parsed.map_err(|_| bad("segments"))?);
                }
                other => {
                    return Err(Error::Config {
                        line: line_no,
                        reason: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        spec.kind = kind.ok_or(Error::Config {
            line: 0,
            reason: "missing `kind`".into(),
        })?;
        Ok(spec)
    }
}

#[derive(Debug, Clone)]
struct Adversary {
    last_decision: Option<Vec<f64>>,
    direction: Vec<f64>,
}

/// The per-round losses of one environment.
///
/// Oblivious generators materialise every round at construction. The
/// adversarial generator reacts to the learner, so its rounds are produced
/// by [`LossSequence::reveal`] and recorded for later replay.
#[derive(Debug, Clone)]
pub struct LossSequence {
    spec: Option<GeneratorSpec>,
    domain: Domain,
    bounds: ProblemBounds,
    horizon: usize,
    losses: Vec<Loss>,
    adversary: Option<Adversary>,
}

/// Builds a seeded environment satisfying convexity, `‖∇f‖ ≤ G` and `f ∈ [0, GD]`.
pub fn make_loss_sequence(spec: &GeneratorSpec) -> Result<LossSequence> {
    if spec.horizon < 1 {
        return Err(invalid("T", "horizon must be at least 1"));
    }
    let domain = spec.domain()?;
    let bounds = spec.bounds()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dim = spec.dim;
    let (losses, adversary) = match spec.kind {
        GeneratorKind::PiecewiseStationaryAbsolute => {
            let starts = spec.segment_starts();
            if starts.windows(2).any(|w| w[0] >= w[1]) || starts.iter().any(|&s| s < 2) {
                return Err(invalid("segments", "jump rounds must be increasing and >= 2"));
            }
            let mut target = sample_in_ball(&mut rng, &domain);
            let mut next = starts.iter().peekable();
            let mut losses = Vec::with_capacity(spec.horizon);
            for round in 1..=spec.horizon {
                if next.peek() == Some(&&round) {
                    next.next();
                    target = sample_in_ball(&mut rng, &domain);
                }
                losses.push(Loss::Absolute {
                    target: target.clone(),
                    scale: spec.g,
                });
            }
            (losses, None)
        }
        GeneratorKind::DriftingLinear => {
            let mut state: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let mut losses = Vec::with_capacity(spec.horizon);
            for _ in 0..spec.horizon {
                for s in state.iter_mut() {
                    *s = 0.99 * *s + 0.1 * rng.sample::<f64, _>(StandardNormal);
                }
                let scale = spec.g / norm(&state).max(1.0);
                let gradient = state.iter().map(|s| s * scale).collect();
                losses.push(Loss::shifted_linear(gradient, &domain));
            }
            (losses, None)
        }
        GeneratorKind::AdversarialWorstCase => {
            let mut direction = vec![0.0; dim];
            direction[0] = 1.0;
            (
                Vec::with_capacity(spec.horizon),
                Some(Adversary {
                    last_decision: None,
                    direction,
                }),
            )
        }
    };
    Ok(LossSequence {
        spec: Some(spec.clone()),
        domain,
        bounds,
        horizon: spec.horizon,
        losses,
        adversary,
    })
}

fn sample_in_ball(rng: &mut ChaCha8Rng, domain: &Domain) -> Vec<f64> {
    let dim = domain.dim();
    let dir: Vec<f64> = loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            break v.into_iter().map(|x| x / n).collect();
        }
    };
    let u: f64 = rng.random();
    let r = domain.radius() * u.powf(1.0 / dim as f64);
    domain.center().iter().zip(dir).map(|(c, d)| c + r * d).collect()
}

impl LossSequence {
    /// Wraps an explicit list of losses; every loss is checked against the bounds
    /// at the centre and at `2d` boundary points.
    pub fn from_losses(domain: Domain, bounds: ProblemBounds, losses: Vec<Loss>) -> Result<Self> {
        if losses.is_empty() {
            return Err(invalid("T", "horizon must be at least 1"));
        }
        for loss in &losses {
            if loss.dim() != domain.dim() {
                return Err(Error::DimensionMismatch {
                    expected: domain.dim(),
                    got: loss.dim(),
                });
            }
            let mut probes = vec![domain.center().to_vec()];
            for axis in 0..domain.dim() {
                for sign in [-1.0, 1.0] {
                    let mut p = domain.center().to_vec();
                    p[axis] += sign * domain.radius();
                    probes.push(p);
                }
            }
            for p in probes {
                let v = loss.value(&p);
                if !(-1e-9..=bounds.gd() + 1e-9).contains(&v) {
                    return Err(Error::LossOutOfRange {
                        value: v,
                        gd: bounds.gd(),
                    });
                }
                let gn = norm(&loss.gradient(&p));
                if gn > bounds.g * (1.0 + 1e-12) {
                    return Err(Error::GradientBound {
                        norm: gn,
                        bound: bounds.g,
                    });
                }
            }
        }
        Ok(Self {
            spec: None,
            domain,
            bounds,
            horizon: losses.len(),
            losses,
            adversary: None,
        })
    }

    pub fn spec(&self) -> Option<&GeneratorSpec> {
        self.spec.as_ref()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn bounds(&self) -> ProblemBounds {
        self.bounds
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn is_adaptive(&self) -> bool {
        self.adversary.is_some()
    }

    /// Losses fixed so far (all of them for oblivious environments).
    pub fn rounds(&self) -> &[Loss] {
        &self.losses
    }

    /// Returns the loss of round `t` (0-based) once the learner has committed to
    /// `decision`. Already-fixed rounds are replayed unchanged.
    pub fn reveal(&mut self, t: usize, decision: &[f64]) -> Result<&Loss> {
        if t >= self.horizon {
            return Err(Error::RoundOrder {
                expected: self.losses.len(),
                got: t,
            });
        }
        if t < self.losses.len() {
            return Ok(&self.losses[t]);
        }
        if t != self.losses.len() {
            return Err(Error::RoundOrder {
                expected: self.losses.len(),
                got: t,
            });
        }
        let adversary = self.adversary.as_mut().expect("oblivious sequences are complete");
        if decision.len() != self.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                got: decision.len(),
            });
        }
        if let Some(prev) = &adversary.last_decision {
            let step: Vec<f64> = decision.iter().zip(prev).map(|(a, b)| a - b).collect();
            let len = norm(&step);
            if len > 1e-14 {
                adversary.direction = step.into_iter().map(|s| s / len).collect();
            }
        }
        adversary.last_decision = Some(decision.to_vec());
        let gradient = adversary.direction.iter().map(|d| d * self.bounds.g).collect();
        self.losses.push(Loss::shifted_linear(gradient, &self.domain));
        Ok(&self.losses[t])
    }
}
