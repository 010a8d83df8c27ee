//! `silstrike evaluate`: score detected events against ground truth and
//! print precision/recall/latency metrics as JSON.

use crate::CliError;
use silstrike_core::sim::{evaluate, GroundTruth, TruthStrike};
use silstrike_core::strike::StrikeEvent;
use std::path::{Path, PathBuf};

#[derive(Debug, clap::Args)]
pub struct EvaluateArgs {
    /// Event JSONL file (as written by `run --events-out`).
    #[arg(long)]
    events: PathBuf,
    /// Ground-truth JSONL file (as written by `simulate --truth-out`).
    #[arg(long)]
    truth: PathBuf,
    /// Matching tolerance in milliseconds (default: two frame periods
    /// at 60 fps).
    #[arg(long, default_value_t = 100.0 / 3.0)]
    tol_ms: f64,
}

fn parse_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line)
            .map_err(|e| CliError::Input(format!("{} line {}: {e}", path.display(), lineno + 1)))?;
        records.push(record);
    }
    Ok(records)
}

pub fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    if args.tol_ms.is_nan() || args.tol_ms <= 0.0 {
        return Err(CliError::Config(format!(
            "tol_ms: must be positive, got {}",
            args.tol_ms
        )));
    }
    let events: Vec<StrikeEvent> = parse_jsonl(&args.events)?;
    let strikes: Vec<TruthStrike> = parse_jsonl(&args.truth)?;
    let truth = GroundTruth { strikes };

    let report = evaluate(&events, &truth, (args.tol_ms * 1000.0).round() as u64);
    if report.overall.vacuous_recall {
        eprintln!("silstrike: truth file is empty; recall is vacuously 1.0");
    }
    if report.overall.vacuous_precision {
        eprintln!("silstrike: no events; precision is vacuously 1.0");
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(())
}
