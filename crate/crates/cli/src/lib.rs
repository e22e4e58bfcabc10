//! Command-line front end: configuration, input detection and the
//! decompose, leaders, analyze and spectrum pipelines.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;

use std::io::Write;

use cli::{Cli, Command};
use error::{CliError, CliResult};
use serde_json::Value;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "LEADERSCOPE_THREADS";

/// Sizes the global thread pool from [`THREADS_ENV`] when set.
pub fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(format!("cannot size the thread pool: {e}")))
}

fn write_document(doc: &Value, output: Option<&std::path::Path>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(doc).expect("JSON values serialize");
    text.push('\n');
    match output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::config(format!("cannot write to stdout: {e}"))),
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let (doc, common) = match &cli.command {
        Command::Boyd(a) => (commands::boyd(a)?, &a.common),
        Command::Synth(a) => (commands::synth(a)?, &a.common),
        Command::Analyze(a) => (commands::analyze(a)?, &a.common),
        Command::Spectrum(a) => (commands::spectrum(a)?, &a.common),
        Command::Decompose(a) => return commands::decompose_cmd(a),
        Command::Leaders(a) => return commands::leaders(a),
    };
    let output = common.config()?.output;
    write_document(&doc, output.as_deref())
}
