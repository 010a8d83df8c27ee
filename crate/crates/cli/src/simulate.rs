//! `silstrike simulate`: render synthetic performance footage and write
//! the ground-truth strike annotations alongside.

use crate::CliError;
use silstrike_core::frame_io::{encode_pgm, write_y4m, Frame};
use silstrike_core::sim::{default_duo_scripts, simulate, PerformerScript, SimParams};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    /// Performer script file (JSON array of one or two scripts).
    /// Defaults to the built-in two-performer bounce script.
    #[arg(long)]
    script: Option<PathBuf>,
    #[arg(long, default_value_t = 320)]
    width: u32,
    #[arg(long, default_value_t = 240)]
    height: u32,
    #[arg(long, default_value_t = 60.0)]
    fps: f64,
    /// Seconds of footage.
    #[arg(long, default_value_t = 3.0)]
    duration: f64,
    /// Gaussian pixel noise, luma standard deviation.
    #[arg(long, default_value_t = 4.0)]
    noise: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Frame output: a path, or "-" for stdout.
    #[arg(long)]
    frames_out: String,
    /// Frame container: y4m | raw-y8 | pgm-dir.
    #[arg(long, default_value = "y4m")]
    frames_format: String,
    /// Ground-truth JSONL output path (omit to skip).
    #[arg(long)]
    truth_out: Option<PathBuf>,
    /// Print the built-in default script as JSON and exit.
    #[arg(long)]
    emit_default_script: bool,
}

pub fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    if args.emit_default_script {
        let scripts = default_duo_scripts(args.duration);
        println!(
            "{}",
            serde_json::to_string_pretty(&scripts).expect("scripts serialize")
        );
        return Ok(());
    }

    let scripts: Vec<PerformerScript> = match &args.script {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("script file {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("script file {}: {e}", path.display())))?
        }
        None => default_duo_scripts(args.duration),
    };

    let params = SimParams {
        width: args.width,
        height: args.height,
        fps: args.fps,
        duration: args.duration,
        noise_stddev: args.noise,
        seed: args.seed,
    };
    let (frames, truth) =
        simulate(&scripts, &params).map_err(|e| CliError::Config(e.to_string()))?;

    let mut frame_count = 0u64;
    let count_frames = frames.map(|f| {
        frame_count += 1;
        f.expect("simulator frames are infallible")
    });

    match args.frames_format.as_str() {
        "y4m" => {
            let mut out = open_out(&args.frames_out)?;
            write_y4m(&mut out, args.width, args.height, args.fps, count_frames)
                .map_err(|e| CliError::Runtime(format!("writing frames: {e}")))?;
            out.flush()
                .map_err(|e| CliError::Runtime(format!("writing frames: {e}")))?;
        }
        "raw-y8" => {
            let mut out = open_out(&args.frames_out)?;
            for frame in count_frames {
                out.write_all(frame.luma())
                    .map_err(|e| CliError::Runtime(format!("writing frames: {e}")))?;
            }
            out.flush()
                .map_err(|e| CliError::Runtime(format!("writing frames: {e}")))?;
        }
        "pgm-dir" => {
            if args.frames_out == "-" {
                return Err(CliError::Config(
                    "frames_format pgm-dir cannot write to stdout".into(),
                ));
            }
            let dir = PathBuf::from(&args.frames_out);
            std::fs::create_dir_all(&dir)
                .map_err(|e| CliError::Config(format!("frames_out {}: {e}", dir.display())))?;
            for (i, frame) in count_frames.enumerate() {
                let frame: Frame = frame;
                let path = dir.join(format!("{i:06}.pgm"));
                std::fs::write(&path, encode_pgm(&frame))
                    .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "frames_format: expected y4m, raw-y8 or pgm-dir, got {other:?}"
            )))
        }
    }

    if let Some(path) = &args.truth_out {
        let mut out = BufWriter::new(
            File::create(path)
                .map_err(|e| CliError::Runtime(format!("truth_out {}: {e}", path.display())))?,
        );
        for strike in &truth.strikes {
            let line = serde_json::to_string(strike).expect("truth strike serializes");
            writeln!(out, "{line}")
                .map_err(|e| CliError::Runtime(format!("writing truth: {e}")))?;
        }
        out.flush()
            .map_err(|e| CliError::Runtime(format!("writing truth: {e}")))?;
    }

    eprintln!(
        "simulated {frame_count} frames ({}x{} @ {} fps), {} truth strikes",
        args.width,
        args.height,
        args.fps,
        truth.strikes.len()
    );
    Ok(())
}

fn open_out(spec: &str) -> Result<Box<dyn Write>, CliError> {
    if spec == "-" {
        Ok(Box::new(BufWriter::new(std::io::stdout())))
    } else {
        let file =
            File::create(spec).map_err(|e| CliError::Config(format!("frames_out {spec}: {e}")))?;
        Ok(Box::new(BufWriter::new(file)))
    }
}
