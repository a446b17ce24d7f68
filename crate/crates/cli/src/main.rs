use clap::{Args, Parser, Subcommand};
use dioph_cli::config::{Experiment, ExperimentConfig, Format};
use dioph_cli::{run, CliError, RunOptions, EXIT_CONFIG};
use std::path::PathBuf;
use std::process::ExitCode;

/// Metric Diophantine approximation experiments.
#[derive(Parser)]
#[command(name = "dioph", version)]
struct Cli {
    /// Seed for randomised experiments (mc, twisted kim).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; falls back to DIOPH_THREADS, then all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Working precision for decimal and symbolic reals.
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Continued fraction and bad-approximability witness.
    Cf(Overrides),
    /// Partial sums and classification of a convergence criterion.
    Series(Overrides),
    /// Exact measure of finite unions of approximation arcs.
    Measure(Overrides),
    /// Box-counting dimension estimate.
    Dim(Overrides),
    /// Monte Carlo estimate of the approximable fraction.
    Mc(Overrides),
    /// Twisted approximation: scan, liminf, kim, dimension.
    Twisted(Overrides),
    /// Counterexample constructions.
    Counterexample(Overrides),
    /// Star discrepancy of {n x}.
    Discrepancy(Overrides),
    /// Solution counts over a grid of shifts.
    ConjectureScan(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// Base config; its experiment must match the subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parameter override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}

fn build(exp: Experiment, o: &Overrides) -> Result<ExperimentConfig, CliError> {
    let mut c = match &o.config {
        Some(p) => load(p)?,
        None => ExperimentConfig::new(exp),
    };
    if c.experiment != exp {
        return Err(CliError {
            code: EXIT_CONFIG,
            message: format!("config is for `{}`, not `{exp}`", c.experiment),
        });
    }
    for s in &o.set {
        c.set(s)?;
    }
    Ok(c)
}

fn main_inner(cli: Cli) -> Result<i32, CliError> {
    let config = match &cli.command {
        Command::Run { config } => load(config)?,
        Command::Cf(o) => build(Experiment::Cf, o)?,
        Command::Series(o) => build(Experiment::Series, o)?,
        Command::Measure(o) => build(Experiment::Measure, o)?,
        Command::Dim(o) => build(Experiment::Dim, o)?,
        Command::Mc(o) => build(Experiment::Mc, o)?,
        Command::Twisted(o) => build(Experiment::Twisted, o)?,
        Command::Counterexample(o) => build(Experiment::Counterexample, o)?,
        Command::Discrepancy(o) => build(Experiment::Discrepancy, o)?,
        Command::ConjectureScan(o) => build(Experiment::ConjectureScan, o)?,
    };
    let opts = RunOptions {
        seed: cli.seed,
        threads: cli.threads,
        precision_bits: cli.precision_bits,
        out: cli.out,
        format: cli.format,
    };
    let outcome = run(&config, &opts)?;
    outcome.report.write(outcome.format, outcome.out.as_deref())?;
    if let Some(p) = &outcome.report.partial {
        eprintln!("dioph: partial result, certified through {}: {}", p.certified_through, p.reason);
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("dioph: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
