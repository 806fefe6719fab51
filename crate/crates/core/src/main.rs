use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand as ClapSubcommand};

use discounted_oco::commands;
use discounted_oco::config::{RunConfig, Subcommand};
use discounted_oco::Error;

#[derive(Parser, Debug)]
#[command(name = "doco", version, about = "Discounted online convex optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file of key=value lines; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Horizon.
    #[arg(long = "T", global = true)]
    horizon: Option<String>,

    /// Shortest window of the SOGD discount interval.
    #[arg(long, global = true)]
    tau: Option<String>,

    /// Predictor scale; defaults to 1/T.
    #[arg(long = "Z", global = true)]
    z: Option<String>,

    #[arg(long, global = true)]
    dim: Option<String>,

    /// Gradient norm bound.
    #[arg(long = "G", global = true)]
    g: Option<String>,

    #[arg(long, global = true)]
    radius: Option<String>,

    /// piecewise-stationary-absolute | drifting-linear | adversarial-worst-case
    #[arg(long, global = true)]
    gen: Option<String>,

    #[arg(long, global = true)]
    seed: Option<String>,

    /// Comma-separated discounts, or sweep:<points>.
    #[arg(long, global = true)]
    lambdas: Option<String>,

    /// CSV destination; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    verbosity: Option<String>,
}

#[derive(ClapSubcommand, Debug, Clone, Copy)]
enum Command {
    /// OGD at each listed discount, checked against its regret bound.
    RunOgd,
    /// One SOGD run checked at grid and sampled discounts.
    RunSogd,
    /// Invariant corpus for the discounted normal predictor.
    VerifyDnp,
    /// Regret of one SOGD run across a dense discount sweep.
    SweepLambda,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::RunOgd => Subcommand::RunOgd,
            Command::RunSogd => Subcommand::RunSogd,
            Command::VerifyDnp => Subcommand::VerifyDnp,
            Command::SweepLambda => Subcommand::SweepLambda,
        }
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    let flags = [
        ("T", &cli.horizon),
        ("tau", &cli.tau),
        ("Z", &cli.z),
        ("d", &cli.dim),
        ("G", &cli.g),
        ("radius", &cli.radius),
        ("gen", &cli.gen),
        ("seed", &cli.seed),
        ("lambdas", &cli.lambdas),
        ("verbosity", &cli.verbosity),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)
                .map_err(|reason| Error::InvalidParameter { name: key, reason })?;
        }
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    cfg.subcommand = Some(cli.command.into());
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<bool, Error> {
    let cfg = build_config(cli)?;
    let output = commands::run(&cfg)?;
    for w in &output.warnings {
        eprintln!("{w}");
    }
    match &cfg.out {
        Some(path) => fs::write(path, &output.csv)?,
        None => print!("{}", output.csv),
    }
    for (path, body) in &output.files {
        fs::write(path, body)?;
        if cfg.verbosity >= 1 {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(output.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more checks failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
