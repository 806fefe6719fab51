//! Run configuration for the `doco` binary.
//!
//! A config file holds `key=value` lines; `#` starts a comment. Flags given
//! on the command line override file entries.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::loss::{GeneratorKind, GeneratorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    RunOgd,
    RunSogd,
    VerifyDnp,
    SweepLambda,
}

impl Subcommand {
    pub const ALL: [Subcommand; 4] = [
        Subcommand::RunOgd,
        Subcommand::RunSogd,
        Subcommand::VerifyDnp,
        Subcommand::SweepLambda,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Subcommand::RunOgd => "run-ogd",
            Subcommand::RunSogd => "run-sogd",
            Subcommand::VerifyDnp => "verify-dnp",
            Subcommand::SweepLambda => "sweep-lambda",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Unknown {
                what: "subcommand",
                name: s.to_string(),
            })
    }
}

/// Discounts to evaluate: an explicit list, or `points` values spread
/// log-uniformly in `1 − λ` over the SOGD interval (`sweep:points`).
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaSpec {
    List(Vec<f64>),
    Sweep(usize),
}

impl fmt::Display for LambdaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaSpec::Sweep(points) => write!(f, "sweep:{points}"),
            LambdaSpec::List(values) => {
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for LambdaSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some(points) = s.strip_prefix("sweep:") {
            return match points.trim().parse::<usize>() {
                Ok(p) if p >= 1 => Ok(LambdaSpec::Sweep(p)),
                _ => Err(format!("sweep needs a positive point count, got `{points}`")),
            };
        }
        let mut values = Vec::new();
        for part in s.split(',') {
            let v: f64 = part
                .trim()
                .parse()
                .map_err(|_| format!("`{}` is not a number", part.trim()))?;
            if !(v > 0.0 && v < 1.0) {
                return Err(format!("lambda must lie in (0, 1), got {v}"));
            }
            values.push(v);
        }
        Ok(LambdaSpec::List(values))
    }
}

/// Effective settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Option<Subcommand>,
    pub horizon: usize,
    pub tau: usize,
    /// `None` means `1/T`.
    pub z: Option<f64>,
    pub dim: usize,
    pub g: f64,
    pub radius: f64,
    pub generator: GeneratorKind,
    pub seed: u64,
    pub lambdas: Option<LambdaSpec>,
    pub out: Option<PathBuf>,
    pub verbosity: u8,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            subcommand: None,
            horizon: 2000,
            tau: 256,
            z: None,
            dim: 1,
            g: 1.0,
            radius: 0.5,
            generator: GeneratorKind::PiecewiseStationaryAbsolute,
            seed: 0,
            lambdas: None,
            out: None,
            verbosity: 0,
        }
    }
}

fn positive(v: f64, what: &str) -> std::result::Result<f64, String> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{what} must be positive and finite, got {v}"))
    }
}

fn parse<T: FromStr>(value: &str, what: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("invalid {what} `{value}`"))
}

impl RunConfig {
    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let value = value.trim();
        match key {
            "subcommand" => self.subcommand = Some(value.parse().map_err(|e: Error| e.to_string())?),
            "T" => {
                let t: usize = parse(value, "T")?;
                if t < 2 {
                    return Err(format!("T must be at least 2, got {t}"));
                }
                self.horizon = t;
            }
            "tau" => {
                let t: usize = parse(value, "tau")?;
                if t < 1 {
                    return Err("tau must be at least 1".into());
                }
                self.tau = t;
            }
            "Z" => {
                let z = positive(parse(value, "Z")?, "Z")?;
                if z > (-1.0f64).exp() {
                    return Err(format!("Z must not exceed 1/e, got {z}"));
                }
                self.z = Some(z);
            }
            "d" => {
                let d: usize = parse(value, "d")?;
                if d < 1 {
                    return Err("d must be at least 1".into());
                }
                self.dim = d;
            }
            "G" => self.g = positive(parse(value, "G")?, "G")?,
            "radius" => self.radius = positive(parse(value, "radius")?, "radius")?,
            "gen" => self.generator = value.parse().map_err(|e: Error| e.to_string())?,
            "seed" => self.seed = parse(value, "seed")?,
            "lambdas" => self.lambdas = Some(value.parse()?),
            "out" => self.out = Some(PathBuf::from(value)),
            "verbosity" => self.verbosity = parse(value, "verbosity")?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Applies the entries of a config file on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                reason: format!("expected key=value, got `{content}`"),
            })?;
            self.set(key.trim(), value)
                .map_err(|reason| Error::Config { line, reason })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn effective_z(&self) -> f64 {
        self.z.unwrap_or(1.0 / self.horizon as f64)
    }

    pub fn generator_spec(&self) -> GeneratorSpec {
        GeneratorSpec::new(self.generator, self.horizon, self.dim, self.g, self.radius, self.seed)
    }

    /// Settings that determine the CSV content, one `key=value` per line.
    /// `out` is left out so the same experiment written to two paths is byte-identical.
    pub fn experiment_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        if let Some(cmd) = self.subcommand {
            lines.push(format!("subcommand={cmd}"));
        }
        lines.extend([
            format!("T={}", self.horizon),
            format!("tau={}", self.tau),
            format!("Z={}", self.effective_z()),
            format!("d={}", self.dim),
            format!("G={}", self.g),
            format!("radius={}", self.radius),
            format!("gen={}", self.generator),
            format!("seed={}", self.seed),
        ]);
        if let Some(l) = &self.lambdas {
            lines.push(format!("lambdas={l}"));
        }
        lines.push(format!("verbosity={}", self.verbosity));
        lines
    }

    /// Full config file text; [`RunConfig::from_text`] inverts it up to `Z`
    /// being pinned to its effective value.
    pub fn to_text(&self) -> String {
        let mut lines = self.experiment_lines();
        if let Some(out) = &self.out {
            lines.push(format!("out={}", out.display()));
        }
        let mut text = lines.join("\n");
        text.push('\n');
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_effective_z() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.effective_z(), 1.0 / 2000.0);
        assert_eq!(cfg.generator_spec().horizon, 2000);
    }

    #[test]
    fn text_roundtrip() {
        let mut cfg = RunConfig::default();
        for (k, v) in [
            ("subcommand", "run-sogd"),
            ("T", "8192"),
            ("tau", "512"),
            ("Z", "0.0001220703125"),
            ("d", "5"),
            ("gen", "drifting-linear"),
            ("seed", "17"),
            ("lambdas", "0.9,0.99,0.999"),
            ("out", "/tmp/x.csv"),
            ("verbosity", "2"),
        ] {
            cfg.set(k, v).unwrap();
        }
        assert_eq!(RunConfig::from_text(&cfg.to_text()).unwrap(), cfg);

        cfg.lambdas = Some(LambdaSpec::Sweep(40));
        assert_eq!(RunConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = RunConfig::from_text("# header\n\nT=500 # short run\n  seed = 3\n").unwrap();
        assert_eq!((cfg.horizon, cfg.seed), (500, 3));
    }

    #[test]
    fn errors_name_the_line() {
        let err = RunConfig::from_text("T=100\nlambdas=0.9,1.5\n").unwrap_err();
        match err {
            Error::Config { line, reason } => {
                assert_eq!(line, 2);
                assert!(reason.contains("1.5"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
        for (text, line) in [
            ("T=100\nnonsense\n", 2),
            ("gen=spiral\n", 1),
            ("\n\nZ=0.5\n", 3),
            ("colour=blue\n", 1),
            ("lambdas=sweep:0\n", 1),
        ] {
            assert!(
                matches!(RunConfig::from_text(text), Err(Error::Config { line: l, .. }) if l == line),
                "{text:?}"
            );
        }
    }
}
