//! silstrike: silhouette percussive-gesture detection from the command line.
//!
//! Machine output (JSON, JSONL, frame streams) goes to stdout or files;
//! human-readable status goes to stderr. Exit codes: 0 clean EOF,
//! 2 invalid configuration, 3 unreadable input, 4 runtime I/O failure.

mod bench;
mod config;
mod evaluate;
mod run;
mod simulate;

use clap::{Parser, Subcommand};
use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration; nothing was processed. Exit 2.
    Config(String),
    /// Input could not be opened or parsed. Exit 3.
    Input(String),
    /// I/O failure after processing started. Exit 4.
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Input(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "invalid configuration: {msg}"),
            CliError::Input(msg) => write!(f, "unreadable input: {msg}"),
            CliError::Runtime(msg) => write!(f, "runtime failure: {msg}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "silstrike",
    version,
    about = "Silhouette-based percussive gesture detection: stream frames in, \
             get strike events, OSC triggers and contour-spine geometry out"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run detection over a frame stream and emit events.
    Run(run::RunArgs),
    /// Generate synthetic performance footage plus ground truth.
    Simulate(simulate::SimulateArgs),
    /// Score an event stream against ground truth.
    Evaluate(evaluate::EvaluateArgs),
    /// Measure detection throughput on simulated frames.
    Bench(bench::BenchArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run::cmd_run(args),
        Command::Simulate(args) => simulate::cmd_simulate(args),
        Command::Evaluate(args) => evaluate::cmd_evaluate(args),
        Command::Bench(args) => bench::cmd_bench(args),
    };
    if let Err(err) = result {
        eprintln!("silstrike: {err}");
        std::process::exit(err.exit_code());
    }
}
