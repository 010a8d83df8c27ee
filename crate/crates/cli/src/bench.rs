//! `silstrike bench`: throughput measurement over simulated frames with
//! no sinks attached — frame-budget evidence for live use.
//!
//! Frame generation is timed separately from the detection pipeline;
//! the reported `pipeline_fps` is the sustained detection rate.

use crate::config::{load_file_config, resolve_pipeline, PipelineFlags};
use crate::CliError;
use serde_json::json;
use silstrike_core::pipeline::DetectionPipeline;
use silstrike_core::sim::{default_duo_scripts, simulate, SimParams};
use silstrike_core::types::Side;
use std::time::Instant;

#[derive(Debug, clap::Args)]
pub struct BenchArgs {
    /// Number of simulated frames to process.
    #[arg(long, default_value_t = 600)]
    frames: u64,
    #[arg(long, default_value_t = 320)]
    width: u32,
    #[arg(long, default_value_t = 240)]
    height: u32,
    #[arg(long, default_value_t = 60.0)]
    fps: f64,
    /// Gaussian pixel noise, luma standard deviation.
    #[arg(long, default_value_t = 4.0)]
    noise: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Compute spine geometry too (off by default; spines are a sink
    /// concern and bench has no sinks).
    #[arg(long)]
    spines: bool,
    #[command(flatten)]
    pipeline: PipelineFlags,
}

pub fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    if args.frames == 0 {
        return Err(CliError::Config("frames: must be positive".into()));
    }
    if args.fps.is_nan() || args.fps <= 0.0 {
        return Err(CliError::Config(format!(
            "fps: must be positive, got {}",
            args.fps
        )));
    }
    let file = load_file_config(args.pipeline.config.as_deref())?;
    let mut cfg = resolve_pipeline(&args.pipeline, &file, args.fps)?;
    cfg.spines_enabled = args.spines;

    let duration = args.frames as f64 / args.fps;
    let scripts = default_duo_scripts(duration);
    let params = SimParams {
        width: args.width,
        height: args.height,
        fps: args.fps,
        duration,
        noise_stddev: args.noise,
        seed: args.seed,
    };
    let (frames, _) = simulate(&scripts, &params).map_err(|e| CliError::Config(e.to_string()))?;

    let mut pipeline = DetectionPipeline::new(cfg);
    let mut events_left = 0u64;
    let mut events_right = 0u64;
    let mut generation_us = 0u64;
    let wall_start = Instant::now();
    let mut gen_start = Instant::now();
    for frame in frames {
        let frame = frame.expect("simulator frames are infallible");
        generation_us += gen_start.elapsed().as_micros() as u64;
        let output = pipeline
            .process(&frame)
            .map_err(|e| CliError::Runtime(format!("pipeline: {e}")))?;
        for event in output.events {
            match event.side {
                Side::Left => events_left += 1,
                Side::Right => events_right += 1,
            }
        }
        gen_start = Instant::now();
    }
    for event in pipeline.finish() {
        match event.side {
            Side::Left => events_left += 1,
            Side::Right => events_right += 1,
        }
    }
    let wall = wall_start.elapsed();

    let stats = pipeline.stats;
    let pipeline_secs = stats.total_us() as f64 / 1e6;
    let pipeline_fps = stats.frames as f64 / pipeline_secs.max(1e-9);
    let stage_means: serde_json::Map<String, serde_json::Value> = stats
        .means()
        .iter()
        .map(|(name, us)| (format!("{name}_us"), json!(us)))
        .collect();

    let report = json!({
        "frames": stats.frames,
        "width": args.width,
        "height": args.height,
        "pipeline_fps": pipeline_fps,
        "pipeline_s": pipeline_secs,
        "generation_s": generation_us as f64 / 1e6,
        "wall_s": wall.as_secs_f64(),
        "wall_fps": stats.frames as f64 / wall.as_secs_f64().max(1e-9),
        "stage_mean_us": stage_means,
        "events": { "left": events_left, "right": events_right },
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    eprintln!(
        "bench: {} frames, detection {:.0} fps ({:.3} ms/frame)",
        stats.frames,
        pipeline_fps,
        1000.0 / pipeline_fps
    );
    Ok(())
}
