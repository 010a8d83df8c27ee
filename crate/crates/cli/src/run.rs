//! `silstrike run`: stream frames through the detection pipeline and
//! emit strike events (JSONL + OSC) and optional spine geometry.
//!
//! Scene switches arrive as `scene <name>` lines on stdin (only when the
//! frame stream itself is not stdin) and take effect between frames.

use crate::config::{
    load_file_config, load_scenes, parse_format, parse_input, resolve_pipeline, PipelineFlags,
};
use crate::CliError;
use silstrike_core::events::{
    encode_osc, event_record_json, map_event, Emitter, OscSender, SceneRouter,
};
use silstrike_core::frame_io::{open_stream, FrameSource, StreamInput};
use silstrike_core::pipeline::DetectionPipeline;
use silstrike_core::spine::spine_record_json;
use silstrike_core::strike::StrikeEvent;
use silstrike_core::types::Side;
use std::fs::File;
use std::io::{BufRead, BufWriter, Write};
use std::path::PathBuf;
use std::sync::mpsc;
use std::time::Instant;

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// Frame stream: a path, or "-" for stdin.
    #[arg(long)]
    input: Option<String>,
    /// Stream container: pgm-sequence | raw-y8 | y4m.
    #[arg(long)]
    format: Option<String>,
    /// Frame width (required for raw-y8).
    #[arg(long)]
    width: Option<u32>,
    /// Frame height (required for raw-y8).
    #[arg(long)]
    height: Option<u32>,
    /// Nominal frame rate for timestamp synthesis.
    #[arg(long)]
    fps: Option<f64>,
    #[command(flatten)]
    pipeline: PipelineFlags,
    /// Scene configuration file (JSON array of scenes).
    #[arg(long)]
    scenes: Option<PathBuf>,
    /// Initial scene name (default: first in the file).
    #[arg(long)]
    scene: Option<String>,
    /// OSC destination host:port; repeatable.
    #[arg(long = "osc")]
    osc_dests: Vec<String>,
    /// Event JSONL sink: a path, or "-" for stdout.
    #[arg(long)]
    events_out: Option<String>,
    /// Spine geometry JSONL sink (requires a scene with spine_output).
    #[arg(long)]
    spines_out: Option<PathBuf>,
    /// Network queue capacity (oldest dropped when full).
    #[arg(long)]
    queue_capacity: Option<usize>,
}

enum Sink {
    Stdout(std::io::Stdout),
    File(BufWriter<File>),
}

impl Sink {
    fn create(key: &str, spec: &str) -> Result<Sink, CliError> {
        if spec == "-" {
            Ok(Sink::Stdout(std::io::stdout()))
        } else {
            let file = File::create(spec)
                .map_err(|e| CliError::Config(format!("{key} {spec}: {e}")))?;
            Ok(Sink::File(BufWriter::new(file)))
        }
    }

    fn write_line(&mut self, line: &str) -> Result<(), CliError> {
        let result = match self {
            Sink::Stdout(out) => writeln!(out, "{line}"),
            Sink::File(out) => writeln!(out, "{line}"),
        };
        result.map_err(|e| CliError::Runtime(format!("writing event sink: {e}")))
    }

    fn flush(&mut self) -> Result<(), CliError> {
        let result = match self {
            Sink::Stdout(out) => out.flush(),
            Sink::File(out) => out.flush(),
        };
        result.map_err(|e| CliError::Runtime(format!("flushing event sink: {e}")))
    }
}

pub fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    // --- configuration, validated in full before any frame ---
    let file = load_file_config(args.pipeline.config.as_deref())?;

    let input_spec = args
        .input
        .clone()
        .or_else(|| file.input.clone())
        .ok_or_else(|| CliError::Config("input: no frame source given".into()))?;
    let format_name = args
        .format
        .clone()
        .or_else(|| file.format.clone())
        .unwrap_or_else(|| "y4m".into());
    let width = args.width.or(file.width);
    let height = args.height.or(file.height);
    let fps = args.fps.or(file.fps).unwrap_or(60.0);
    if fps.is_nan() || fps <= 0.0 {
        return Err(CliError::Config(format!(
            "fps: must be positive, got {fps}"
        )));
    }
    let format = parse_format(&format_name, width, height)?;
    let mut pipeline_cfg = resolve_pipeline(&args.pipeline, &file, fps)?;

    let scenes_path = args
        .scenes
        .clone()
        .or_else(|| file.scenes.clone().map(PathBuf::from));
    let scene_name = args.scene.clone().or_else(|| file.scene.clone());
    let mut router = load_scenes(scenes_path.as_deref(), scene_name.as_deref())?;

    let osc_dests = if args.osc_dests.is_empty() {
        file.osc.clone().unwrap_or_default()
    } else {
        args.osc_dests.clone()
    };
    let mut senders = Vec::new();
    for dest in &osc_dests {
        senders.push(
            OscSender::new(dest)
                .map_err(|e| CliError::Config(format!("osc destination {dest}: {e}")))?,
        );
    }
    let queue_capacity = args.queue_capacity.or(file.queue_capacity).unwrap_or(256);
    if queue_capacity == 0 {
        return Err(CliError::Config("queue_capacity: must be >= 1".into()));
    }

    let events_out_spec = args
        .events_out
        .clone()
        .or_else(|| file.events_out.clone())
        .unwrap_or_else(|| "-".into());
    let spines_out = args
        .spines_out
        .clone()
        .or_else(|| file.spines_out.clone().map(PathBuf::from));

    // Spines are computed only when a sink exists; the active scene's
    // spine_output flag gates emission frame by frame.
    pipeline_cfg.spines_enabled = spines_out.is_some();

    let input = parse_input(&input_spec);
    let reading_stdin = matches!(input, StreamInput::Stdin);

    // --- open everything (config is now known good) ---
    let source = open_stream(input, format, fps)
        .map_err(|e| CliError::Input(format!("{input_spec}: {e}")))?;

    let mut events_sink = Sink::create("events_out", &events_out_spec)?;
    let mut spines_sink = match &spines_out {
        Some(path) => Some(Sink::create("spines_out", &path.display().to_string())?),
        None => None,
    };

    let emitter = Emitter::spawn(senders, queue_capacity);
    let handle = emitter.handle();

    // Scene commands on stdin, unless stdin carries the frames.
    let commands = if reading_stdin {
        None
    } else {
        Some(spawn_command_reader())
    };

    // --- frame loop ---
    let started = Instant::now();
    let mut pipeline = DetectionPipeline::new(pipeline_cfg);
    let mut frames = 0u64;
    let mut events_left = 0u64;
    let mut events_right = 0u64;
    let result = drive(
        source,
        &mut pipeline,
        &mut router,
        &commands,
        &handle,
        &mut events_sink,
        &mut spines_sink,
        &mut frames,
        &mut events_left,
        &mut events_right,
    );

    events_sink.flush()?;
    if let Some(sink) = &mut spines_sink {
        sink.flush()?;
    }
    let (dropped, send_errors) = emitter.shutdown();
    result?;

    let elapsed = started.elapsed();
    let mean_frame_ms = if frames > 0 {
        pipeline.stats.total_us() as f64 / frames as f64 / 1000.0
    } else {
        0.0
    };
    eprintln!(
        "frames: {frames}  events: L={events_left} R={events_right}  \
         queue-dropped: {dropped}  send-errors: {send_errors}  \
         mean frame time: {mean_frame_ms:.3} ms  wall: {:.2} s",
        elapsed.as_secs_f64()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn drive(
    source: FrameSource,
    pipeline: &mut DetectionPipeline,
    router: &mut SceneRouter,
    commands: &Option<mpsc::Receiver<String>>,
    handle: &silstrike_core::events::EmitterHandle,
    events_sink: &mut Sink,
    spines_sink: &mut Option<Sink>,
    frames: &mut u64,
    events_left: &mut u64,
    events_right: &mut u64,
) -> Result<(), CliError> {
    let emit = |event: &StrikeEvent,
                router: &SceneRouter,
                events_sink: &mut Sink,
                left: &mut u64,
                right: &mut u64|
     -> Result<(), CliError> {
        match event.side {
            Side::Left => *left += 1,
            Side::Right => *right += 1,
        }
        events_sink.write_line(&event_record_json(event))?;
        for msg in map_event(event, router.active()) {
            match encode_osc(&msg) {
                Ok(bytes) => handle.push(bytes),
                Err(e) => eprintln!("silstrike: dropping malformed message: {e}"),
            }
        }
        Ok(())
    };

    for frame in source {
        // Scene switches apply between frames, never mid-frame.
        if let Some(rx) = commands {
            while let Ok(line) = rx.try_recv() {
                apply_command(router, &line);
            }
        }

        let frame = frame.map_err(|e| CliError::Runtime(format!("frame stream: {e}")))?;
        let output = pipeline
            .process(&frame)
            .map_err(|e| CliError::Runtime(format!("pipeline: {e}")))?;
        *frames += 1;

        for event in &output.events {
            emit(event, router, events_sink, events_left, events_right)?;
        }
        if let Some(sink) = spines_sink {
            if router.active().spine_output {
                for (side, field) in &output.spines {
                    sink.write_line(&spine_record_json(*side, field))?;
                }
            }
        }
    }

    for event in pipeline.finish() {
        emit(&event, router, events_sink, events_left, events_right)?;
    }
    Ok(())
}

fn apply_command(router: &mut SceneRouter, line: &str) {
    let line = line.trim();
    if let Some(name) = line.strip_prefix("scene ") {
        match router.switch_scene(name.trim()) {
            Ok(scene) => eprintln!("silstrike: scene -> {}", scene.name),
            Err(e) => eprintln!("silstrike: {e} (scene unchanged)"),
        }
    } else if !line.is_empty() {
        eprintln!("silstrike: unknown command {line:?}");
    }
}

fn spawn_command_reader() -> mpsc::Receiver<String> {
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let stdin = std::io::stdin();
        for line in stdin.lock().lines() {
            match line {
                Ok(line) => {
                    if tx.send(line).is_err() {
                        break;
                    }
                }
                Err(_) => break,
            }
        }
    });
    rx
}
