//! Batch runner for the dioph-core experiments: JSON configs in,
//! deterministic JSON or long-format CSV reports out.

pub mod config;
mod experiments;
pub mod report;

use config::{ExperimentConfig, Experiment, Format};
use dioph_core::Error;
use report::{Partial, Provenance, Report};
use std::path::PathBuf;
use std::time::Instant;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_PRECISION: i32 = 4;
const EXIT_IO: i32 = 1;

pub const DEFAULT_PRECISION_BITS: u32 = 256;

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> CliError {
        CliError { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn io(e: impl std::fmt::Display) -> CliError {
        CliError { code: EXIT_IO, message: e.to_string() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        let code = match e {
            Error::PrecisionExhausted(_) => EXIT_PRECISION,
            Error::TooManyArcs { .. }
            | Error::BudgetExceeded(_)
            | Error::GridTooFine(_)
            | Error::LimitTooLarge { .. }
            | Error::DimensionTooLarge(_)
            | Error::Overflow(_) => EXIT_BUDGET,
            _ => EXIT_CONFIG,
        };
        CliError { code, message: e.to_string() }
    }
}

/// Command-line overrides applied on top of a config.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub precision_bits: Option<u32>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunOptions {
    /// --threads, then DIOPH_THREADS, then every available core.
    pub fn thread_count(&self) -> usize {
        self.threads
            .or_else(|| std::env::var("DIOPH_THREADS").ok().and_then(|v| v.trim().parse().ok()))
            .filter(|&n| n > 0)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

/// The outcome of a run: the report and the exit status it implies.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub exit_code: i32,
}

fn uses_seed(c: &ExperimentConfig) -> bool {
    match c.experiment {
        Experiment::Mc => true,
        Experiment::Twisted => c.parameters.mode.as_deref() == Some("kim"),
        _ => false,
    }
}

/// Parse "certified through q = K" (or "N = K") out of a precision error.
fn certified_through(msg: &str) -> Option<u64> {
    let tail = msg.split("certified through").nth(1)?;
    tail.split('=').nth(1)?.trim().split(|c: char| !c.is_ascii_digit()).next()?.parse().ok()
}

/// Narrow the config to the certified prefix, if the experiment has one.
fn truncated(c: &ExperimentConfig, k: u64) -> Option<ExperimentConfig> {
    let mut t = c.clone();
    let p = &mut t.parameters;
    if let Some(cps) = &p.checkpoints {
        if c.experiment == Experiment::Discrepancy {
            let kept: Vec<u64> = cps.iter().copied().filter(|&n| n <= k).collect();
            if kept.is_empty() {
                return None;
            }
            p.checkpoints = Some(kept);
            return Some(t);
        }
    }
    match p.q_max {
        Some(q) if k >= 1 && k < q => {
            p.q_max = Some(k);
            Some(t)
        }
        _ => None,
    }
}

pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    config.validate()?;
    let mut config = config.clone();
    if uses_seed(&config) {
        if let Some(s) = opts.seed {
            config.parameters.seed = Some(s);
        }
        config.parameters.seed.get_or_insert(0);
    }
    let threads = opts.thread_count();
    let bits = opts.precision_bits.unwrap_or(DEFAULT_PRECISION_BITS);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(CliError::io)?;
    let start = Instant::now();
    let ctx = experiments::Ctx { bits };
    let (result, partial) = pool.install(|| match experiments::dispatch(&config, &ctx) {
        Ok(r) => Ok((r, None)),
        Err(CliError { code: EXIT_PRECISION, message }) => {
            let Some(k) = certified_through(&message) else {
                return Err(CliError { code: EXIT_PRECISION, message });
            };
            let Some(t) = truncated(&config, k) else {
                return Err(CliError { code: EXIT_PRECISION, message });
            };
            let r = experiments::dispatch(&t, &ctx)?;
            Ok((r, Some(Partial { reason: message, certified_through: k })))
        }
        Err(e) => Err(e),
    })?;
    let (summary, table) = result;
    let exit_code = if partial.is_some() { EXIT_PRECISION } else { 0 };
    let format = opts.format.or(config.output.format).unwrap_or_default();
    let out = opts.out.clone().or_else(|| config.output.path.clone());
    let report = Report {
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: config.parameters.seed,
            precision_bits: bits,
            threads,
            wall_time_ms: start.elapsed().as_millis(),
        },
        config,
        summary,
        table,
        partial,
    };
    Ok(Outcome { report, format, out, exit_code })
}
