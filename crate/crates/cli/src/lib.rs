//! The `lumen` command-line pipeline: normalisation, exposure synthesis,
//! descriptor extraction and whitening, evaluation and pair mining.
//!
//! Every subcommand runs inside a dedicated thread pool and merges results
//! in input order, so outputs do not depend on the thread count.

pub mod args;
mod commands;
pub mod config;
mod error;
mod files;
mod plot;

use std::fmt;

pub use args::{Cli, Command};
pub use config::PipelineConfig;
pub use error::{CliError, CliResult};

pub const THREADS_ENV: &str = "LUMEN_THREADS";

/// An input that could not be processed; the command went on without it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemFailure {
    pub item: String,
    pub message: String,
}

impl fmt::Display for ItemFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.item, self.message)
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub failures: Vec<ItemFailure>,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub(crate) fn fail(&mut self, item: impl Into<String>, message: impl fmt::Display) {
        self.failures.push(ItemFailure {
            item: item.into(),
            message: message.to_string(),
        });
    }

    pub(crate) fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    /// 0 when every item succeeded, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(!self.failures.is_empty())
    }
}

/// `LUMEN_THREADS` if set, else `requested`.
pub fn resolve_threads(requested: Option<usize>) -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(requested),
    }
}

fn pool(threads: Option<usize>) -> CliResult<rayon::ThreadPool> {
    if threads == Some(0) {
        return Err(CliError::Usage("thread count must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    // The evaluate config may carry its own thread count.
    let config = match &cli.command {
        Command::Evaluate(a) => Some(PipelineConfig::load(&a.config)?),
        _ => None,
    };
    let requested = cli.threads.or(config.as_ref().and_then(|c| c.threads));
    let pool = pool(resolve_threads(requested)?)?;
    pool.install(|| match &cli.command {
        Command::Normalize(a) => commands::normalize(a),
        Command::SynthExposure(a) => commands::synth_exposure(a),
        Command::Extract(a) => commands::extract(a),
        Command::WhitenLearn(a) => commands::whiten_learn(a),
        Command::WhitenApply(a) => commands::whiten_apply(a),
        Command::Ensemble(a) => commands::ensemble(a),
        Command::Evaluate(a) => commands::evaluate(a, config.as_ref().expect("loaded above")),
        Command::MinePositives(a) => commands::mine_positives(a),
        Command::MineNegatives(a) => commands::mine_negatives(a),
    })
}
