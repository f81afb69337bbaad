//! Command-line front end: configs in, schema-versioned reports out.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use commands::{cmd_feasibility, cmd_predict, cmd_simulate, cmd_verify, CommandOutput};
pub use config::{BaselineEntry, Format, RunConfig};
pub use report::Report;

/// Exit status of a run that completed and matched expectations.
pub const EXIT_OK: i32 = 0;
/// `verify` found verdicts that differ from the baseline.
pub const EXIT_MISMATCH: i32 = 1;
/// Bad arguments, bad config, bad input or I/O failure.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("a seed is required (set `run.seed` or pass --seed)")]
    MissingSeed,
    #[error("no baseline for model `{0}` (add a `[baseline.{0}]` table)")]
    MissingBaseline(String),
    #[error("input rejected: {0}")]
    Input(String),
    #[error("report could not be encoded: {0}")]
    Encode(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

#[derive(Debug, Parser)]
#[command(name = "friendlab", version, about = "Extended Wigner's-friend scenarios: predictions, feasibility, simulation, verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Unitary predictions for every context and slice.
    Predict(CommonArgs),
    /// Whether one assignment of every variable reproduces the predictions.
    Feasibility(CommonArgs),
    /// Sample each model in each context and write JSON-lines batches.
    Simulate(CommonArgs),
    /// Run every check and compare the verdicts with the config's baseline.
    Verify(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Config file (TOML).
    #[arg(long, value_name = "PATH", conflicts_with = "scenario")]
    pub config: Option<PathBuf>,
    /// Shipped preset: wigner, bong, lawrence or ormrod-barrett.
    #[arg(long, value_name = "NAME")]
    pub scenario: Option<String>,
    /// Model to run (repeatable); replaces the config's model list.
    #[arg(long = "model", value_name = "NAME")]
    pub models: Vec<String>,
    #[arg(long, value_name = "N")]
    pub samples: Option<usize>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Batch directory for `simulate` (default `batches`); report file otherwise.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

impl CommonArgs {
    /// The config with command-line overrides applied.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config = match (&self.config, &self.scenario) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(name)) => RunConfig::preset(name)?,
            (None, None) => return Err(CliError::Usage("pass --config PATH or --scenario NAME".into())),
        };
        if !self.models.is_empty() {
            config.models = self.models.iter().map(|n| friendlab_core::models::ModelSpec::named(n)).collect();
            config.baseline.retain(|name, _| self.models.contains(name));
        }
        if let Some(n) = self.samples {
            config.run.samples = n;
        }
        if self.seed.is_some() {
            config.run.seed = self.seed;
        }
        if let Some(f) = self.format {
            config.run.format = f;
        }
        config.validate()?;
        Ok(config)
    }
}

/// Parses `args` and runs the command, writing the report to `stdout` (or
/// the `--out` file) and diagnostics to `stderr`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(outcome) => {
            for line in &outcome.diff {
                let _ = writeln!(stderr, "{line}");
            }
            outcome.exit_code()
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: &Command, stdout: &mut dyn Write) -> Result<CommandOutput, CliError> {
    let (args, outcome) = match command {
        Command::Predict(a) => (a, cmd_predict(&a.resolve()?)?),
        Command::Feasibility(a) => (a, cmd_feasibility(&a.resolve()?)?),
        Command::Simulate(a) => {
            let dir = a.out.clone().unwrap_or_else(|| PathBuf::from("batches"));
            let outcome = cmd_simulate(&a.resolve()?, &dir)?;
            let text = outcome.report.render(Format::Json)?;
            let path = dir.join("summary.json");
            std::fs::write(&path, text).map_err(|e| io_error(&path, e))?;
            (a, outcome)
        }
        Command::Verify(a) => (a, cmd_verify(&a.resolve()?)?),
    };
    let text = outcome.report.render(outcome.report.config.run.format)?;
    match (&args.out, command) {
        (Some(path), Command::Predict(_) | Command::Feasibility(_) | Command::Verify(_)) => {
            std::fs::write(path, &text).map_err(|e| io_error(path, e))?;
        }
        _ => stdout
            .write_all(text.as_bytes())
            .map_err(|e| io_error(std::path::Path::new("<stdout>"), e))?,
    }
    Ok(outcome)
}

pub(crate) fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}
