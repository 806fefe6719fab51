//! Subcommands of the `doco` binary. Each returns the CSV text plus any side
//! files; writing them out is left to the caller.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{LambdaSpec, RunConfig, Subcommand};
use crate::dnp::UpdateMode;
use crate::error::{invalid, Result};
use crate::lab::{evaluate, BoundInputs, BoundKind, RegretReport, REPORT_HEADER, REPORT_SCHEMA};
use crate::loss::make_loss_sequence;
use crate::ogd::run_ogd;
use crate::sogd::{regime_satisfied, run_sogd, DiscountGrid, SogdRun};
use crate::special::{Confidence, ConfidenceParams};
use crate::verify::{corpus_csv, play, BitFamily, CorpusConfig, CORPUS_SCHEMA};

/// Number of λ drawn for the uniform check when none are configured.
pub const SAMPLED_LAMBDAS: usize = 20;
pub const DEFAULT_SWEEP_POINTS: usize = 100;
pub const DEFAULT_OGD_LAMBDAS: [f64; 3] = [0.9, 0.99, 0.999];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommandOutput {
    pub csv: String,
    /// Extra files (traces) to write next to the CSV.
    pub files: Vec<(PathBuf, String)>,
    pub warnings: Vec<String>,
}

impl CommandOutput {
    pub fn all_pass(&self) -> bool {
        let mut lines = self.csv.lines().filter(|l| !l.starts_with('#'));
        let header = lines.next().unwrap_or("");
        let Some(col) = header.split(',').position(|c| c == "pass") else {
            return false;
        };
        lines.all(|l| l.split(',').nth(col) == Some("true"))
    }
}

pub fn run(cfg: &RunConfig) -> Result<CommandOutput> {
    match cfg.subcommand {
        Some(Subcommand::RunOgd) => cmd_run_ogd(cfg),
        Some(Subcommand::RunSogd) => cmd_run_sogd(cfg),
        Some(Subcommand::VerifyDnp) => cmd_verify_dnp(cfg),
        Some(Subcommand::SweepLambda) => cmd_sweep_lambda(cfg),
        None => Err(invalid("subcommand", "no subcommand given")),
    }
}

fn preamble(schema: &str, cfg: &RunConfig, notes: &[String]) -> String {
    let mut out = format!("# schema={schema}\n");
    for line in cfg.experiment_lines() {
        let _ = writeln!(out, "# {line}");
    }
    for note in notes {
        if note.starts_with("warning:") {
            let _ = writeln!(out, "# {note}");
        } else {
            let _ = writeln!(out, "# note: {note}");
        }
    }
    out
}

fn report_csv(cfg: &RunConfig, notes: &[String], reports: &[RegretReport]) -> String {
    let mut out = preamble(REPORT_SCHEMA, cfg, notes);
    out.push_str(REPORT_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row(cfg.seed, cfg.generator.as_str()));
        out.push('\n');
    }
    out
}

/// `points` discounts with `1 − λ` log-spaced over `[1/T, 1/τ]`, ascending in λ.
pub fn sweep_lambdas(grid: &DiscountGrid, points: usize) -> Vec<f64> {
    let (lo, hi) = (1.0 / grid.horizon as f64, 1.0 / grid.tau as f64);
    if points == 1 {
        return vec![1.0 - (lo * hi).sqrt()];
    }
    (0..points)
        .map(|k| {
            let frac = k as f64 / (points - 1) as f64;
            1.0 - (hi.ln() + frac * (lo.ln() - hi.ln())).exp()
        })
        .collect()
}

/// `count` seeded discounts with `1 − λ` log-uniform over `[1/T, 1/τ]`, sorted.
pub fn sampled_lambdas(grid: &DiscountGrid, count: usize, seed: u64) -> Vec<f64> {
    let (lo, hi) = ((1.0 / grid.horizon as f64).ln(), (1.0 / grid.tau as f64).ln());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<f64> = (0..count).map(|_| 1.0 - rng.random_range(lo..=hi).exp()).collect();
    out.sort_by(f64::total_cmp);
    out
}

fn check_in_interval(grid: &DiscountGrid, lambdas: &[f64]) -> Result<()> {
    let (a, b) = grid.interval();
    for &l in lambdas {
        if !(a..=b).contains(&l) {
            return Err(invalid("lambdas", format!("{l} lies outside [{a}, {b}]")));
        }
    }
    Ok(())
}

fn uniform_lambdas(cfg: &RunConfig, grid: &DiscountGrid, default: LambdaSpec) -> Result<Vec<f64>> {
    let lambdas = match cfg.lambdas.clone().unwrap_or(default) {
        LambdaSpec::List(v) => v,
        LambdaSpec::Sweep(p) => sweep_lambdas(grid, p),
    };
    check_in_interval(grid, &lambdas)?;
    Ok(lambdas)
}

fn regime_warning(cfg: &RunConfig) -> Option<String> {
    let z = cfg.effective_z();
    if regime_satisfied(cfg.tau, z) {
        return None;
    }
    let need = (16.0 * std::f64::consts::E).max(32.0 * (1.0 / z).ln());
    Some(format!(
        "warning: tau={} is below max(16e, 32 ln(1/Z)) = {need:.3}; the uniform bound is not guaranteed",
        cfg.tau
    ))
}

fn trace_path(cfg: &RunConfig, suffix: &str) -> PathBuf {
    match &cfg.out {
        Some(out) => {
            let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("doco");
            out.with_file_name(format!("{stem}.{suffix}.csv"))
        }
        None => Path::new(".").join(format!(
            "{}.{suffix}.csv",
            cfg.subcommand.map_or("doco", |c| c.as_str())
        )),
    }
}

/// OGD tuned to each configured λ, checked against the constant-step bound.
pub fn cmd_run_ogd(cfg: &RunConfig) -> Result<CommandOutput> {
    let lambdas = match &cfg.lambdas {
        None => DEFAULT_OGD_LAMBDAS.to_vec(),
        Some(LambdaSpec::List(v)) => v.clone(),
        Some(LambdaSpec::Sweep(_)) => return Err(invalid("lambdas", "run-ogd takes an explicit list")),
    };
    let spec = cfg.generator_spec();
    let mut reports = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        // The adversarial environment reacts to the learner, so every λ gets a fresh copy.
        let mut seq = make_loss_sequence(&spec)?;
        let start = seq.domain().center().to_vec();
        let decisions = run_ogd(lambda, &mut seq, start)?;
        let inputs = BoundInputs::ogd(seq.bounds(), lambda);
        reports.push(evaluate(
            BoundKind::Thm1,
            &inputs,
            &decisions,
            seq.rounds(),
            seq.domain(),
            cfg.horizon,
        )?);
    }
    Ok(CommandOutput {
        csv: report_csv(cfg, &["bound=thm1".into()], &reports),
        ..Default::default()
    })
}

fn sogd_trace(cfg: &RunConfig) -> Result<(SogdRun, crate::loss::LossSequence)> {
    let mut seq = make_loss_sequence(&cfg.generator_spec())?;
    let run = run_sogd(cfg.tau, cfg.effective_z(), &mut seq)?;
    Ok((run, seq))
}

fn uniform_reports(
    run: &SogdRun,
    seq: &crate::loss::LossSequence,
    kind: BoundKind,
    lambdas: &[f64],
) -> Result<Vec<RegretReport>> {
    let decisions = run.decisions();
    lambdas
        .iter()
        .map(|&lambda| {
            let inputs = BoundInputs::sogd(seq.bounds(), lambda, run.z, run.grid.n);
            evaluate(kind, &inputs, &decisions, seq.rounds(), seq.domain(), seq.horizon())
        })
        .collect()
}

/// One SOGD run, checked at every grid discount and at sampled discounts.
pub fn cmd_run_sogd(cfg: &RunConfig) -> Result<CommandOutput> {
    let grid = DiscountGrid::build(cfg.horizon, cfg.tau)?;
    let sampled = match &cfg.lambdas {
        None => sampled_lambdas(&grid, SAMPLED_LAMBDAS, cfg.seed),
        Some(_) => uniform_lambdas(cfg, &grid, LambdaSpec::Sweep(SAMPLED_LAMBDAS))?,
    };
    let warnings: Vec<String> = regime_warning(cfg).into_iter().collect();
    let (run, seq) = sogd_trace(cfg)?;

    let mut reports = uniform_reports(&run, &seq, BoundKind::Eq29Grid, &grid.lambdas)?;
    reports.extend(uniform_reports(&run, &seq, BoundKind::Thm3Uniform, &sampled)?);

    let mut notes = vec![
        format!("grid_n={}", grid.n),
        format!("bound=eq29-grid rows=1..{}", grid.len()),
        format!(
            "bound=thm3-uniform rows={}..{}",
            grid.len() + 1,
            grid.len() + sampled.len()
        ),
    ];
    notes.extend(warnings.iter().cloned());
    let mut out = CommandOutput {
        csv: report_csv(cfg, &notes, &reports),
        files: Vec::new(),
        warnings,
    };
    if cfg.verbosity >= 2 {
        out.files.push((trace_path(cfg, "omega"), run.omega_trace_csv()));
        out.files
            .push((trace_path(cfg, "deviation"), run.deviation_trace_csv()));
        out.files.push((trace_path(cfg, "bits"), run.bit_trace_csv()));
    }
    Ok(out)
}

/// The predictor invariant corpus, one row per check cell.
pub fn cmd_verify_dnp(cfg: &RunConfig) -> Result<CommandOutput> {
    let corpus = CorpusConfig {
        seed: cfg.seed,
        ..CorpusConfig::default()
    };
    let rows = crate::verify::run_corpus(&corpus)?;
    let notes = [
        format!("corpus_horizon={}", corpus.horizon),
        format!("sequences_per_family={}", corpus.sequences_per_family),
        format!("plain_horizon={}", corpus.plain_horizon),
        format!("plain_sequences={}", corpus.plain_sequences),
    ];
    let mut csv = preamble(CORPUS_SCHEMA, cfg, &notes);
    csv.push_str(&corpus_csv(&rows));
    let mut out = CommandOutput {
        csv,
        ..Default::default()
    };
    if cfg.verbosity >= 2 {
        let (n, z) = corpus.cells[0];
        let confidence = Confidence::new(ConfidenceParams::new(n, z)?)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let (bits, run) = play(
            confidence,
            UpdateMode::Conservative,
            BitFamily::Rademacher,
            corpus.horizon,
            &mut rng,
        )?;
        out.files.push((trace_path(cfg, "dnp-trace"), run.trace_csv(&bits)));
    }
    Ok(out)
}

/// Regret and uniform bound of one SOGD trace across a dense λ sweep.
pub fn cmd_sweep_lambda(cfg: &RunConfig) -> Result<CommandOutput> {
    let grid = DiscountGrid::build(cfg.horizon, cfg.tau)?;
    let lambdas = uniform_lambdas(cfg, &grid, LambdaSpec::Sweep(DEFAULT_SWEEP_POINTS))?;
    let warnings: Vec<String> = regime_warning(cfg).into_iter().collect();
    let (run, seq) = sogd_trace(cfg)?;
    let reports = uniform_reports(&run, &seq, BoundKind::Thm3Uniform, &lambdas)?;
    let mut notes = vec![format!("grid_n={}", grid.n), "bound=thm3-uniform".to_string()];
    notes.extend(warnings.iter().cloned());
    Ok(CommandOutput {
        csv: report_csv(cfg, &notes, &reports),
        files: Vec::new(),
        warnings,
    })
}
