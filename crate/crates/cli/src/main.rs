//! `mcg`: batch front end for matrix congruential generator experiments.
//!
//! Exit codes: 0 success, 1 input error, 2 hypothesis rejection, 3 resource guard.

mod commands;
mod config;
mod output;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use config::ExperimentConfig;
use output::{json_bytes, Format};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Rejected(Value),
    Guard { code: &'static str, message: String },
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn io(e: io::Error) -> Self {
        CliError::Input(format!("i/o error: {e}"))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Rejected(_) => 2,
            CliError::Guard { .. } => 3,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            CliError::Input(m) => json!({ "error": "input", "message": m }),
            CliError::Rejected(v) => json!({ "error": "rejected", "verdict": v }),
            CliError::Guard { code, message } => json!({ "error": code, "message": message }),
        }
    }
}

impl From<mcg_core::Error> for CliError {
    fn from(e: mcg_core::Error) -> Self {
        if e.is_resource_guard() {
            CliError::Guard { code: e.code(), message: e.to_string() }
        } else {
            CliError::Input(format!("{}: {e}", e.code()))
        }
    }
}

#[derive(Parser)]
#[command(name = "mcg", version, about = "Matrix congruential generator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sums and enumerations.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Check the theorem hypotheses.
    Validate,
    /// Orders of A modulo p^s and the growth invariants.
    Period,
    /// Emit the vector stream.
    Gen,
    /// Exponential sums over an N schedule.
    Expsum,
    /// Exact discrepancy and the Koksma–Szüsz bound.
    Discrepancy,
    /// Vinogradov counts against Ford's bound.
    Vmvt,
    /// Parameter bookkeeping and explicit bounds over an N schedule.
    Bounds,
    /// Overlay report with spot checks.
    Report,
}

fn run(cli: &Cli) -> Result<(Vec<u8>, bool), CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::input("--config is required"))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let cfg = ExperimentConfig::parse(&text)?;
    let default = if cli.command == Command::Validate { Format::Json } else { Format::Csv };
    let format = cli.format.unwrap_or(default);
    if format == Format::Bin {
        if cli.command != Command::Gen {
            return Err(CliError::input("--format bin applies to gen only"));
        }
        return Ok((commands::gen_binary(&cfg)?, false));
    }
    let report = match cli.command {
        Command::Validate => commands::validate(&cfg)?,
        Command::Period => commands::period(&cfg)?,
        Command::Gen => commands::gen(&cfg)?,
        Command::Expsum => commands::expsum(&cfg)?,
        Command::Discrepancy => commands::discrepancy(&cfg)?,
        Command::Vmvt => commands::vmvt(&cfg)?,
        Command::Bounds => commands::bounds(&cfg)?,
        Command::Report => commands::report(&cfg, cli.seed)?,
    };
    let bytes = match format {
        Format::Csv => report.table.to_csv()?,
        _ => json_bytes(&report.json)?,
    };
    Ok((bytes, report.rejected))
}

fn emit(cli: &Cli, cfg_out: Option<PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match cli.out.clone().or(cfg_out) {
        Some(path) => fs::write(&path, bytes).map_err(|e| CliError::input(format!("{}: {e}", path.display()))),
        None => io::stdout().lock().write_all(bytes).map_err(CliError::io),
    }
}

/// The `out` field of the config, read leniently so a broken config still reports its own error.
fn config_out(cli: &Cli) -> Option<PathBuf> {
    let text = fs::read_to_string(cli.config.as_ref()?).ok()?;
    ExperimentConfig::parse(&text).ok()?.out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", json!({ "error": "input", "message": e.to_string() }));
            return ExitCode::from(1);
        }
    }
    let result = run(&cli).and_then(|(bytes, rejected)| {
        emit(&cli, config_out(&cli), &bytes)?;
        Ok(rejected)
    });
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
