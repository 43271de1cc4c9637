//! `ugtrack` command-line tool.

mod calibrate;
mod error;
mod evaluate;
mod plot;
mod scenes;
mod simulate;
mod track;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::CliError;

#[derive(Parser)]
#[command(name = "ugtrack", version, about = "3D multi-object tracking with uncertainty-guided association")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track a detection sequence, or every scene under a directory.
    Track(track::Args),
    /// Generate detections, poses and truth from a scenario file.
    Simulate(simulate::Args),
    /// Score tracks against truth (CLEAR MOT, optionally AMOTA).
    Evaluate(evaluate::Args),
    /// Estimate noise statistics from truth and detections and write a config.
    Calibrate(calibrate::Args),
    /// Per-frame table of one track for trajectory and uncertainty plots.
    PlotData(plot::Args),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Track(a) => track::run(&a),
        Command::Simulate(a) => simulate::run(&a),
        Command::Evaluate(a) => evaluate::run(&a),
        Command::Calibrate(a) => calibrate::run(&a),
        Command::PlotData(a) => plot::run(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Creates the parent directory of `path` if needed.
fn ensure_parent(path: &std::path::Path) -> Result<(), CliError> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => std::fs::create_dir_all(p).map_err(|e| CliError::io(p, e)),
        _ => Ok(()),
    }
}

fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<(), CliError> {
    ensure_parent(path)?;
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}
