//! Run configuration: a JSON config file supplies defaults, command-line
//! flags override, and the merged result is validated in full before any
//! frame is processed. The first violation aborts with the offending key
//! named.

use serde::Deserialize;
use silstrike_core::events::{default_scene, SceneConfig, SceneRouter};
use silstrike_core::frame_io::{StreamFormat, StreamInput};
use silstrike_core::pipeline::{PipelineConfig, SplitX};
use silstrike_core::silhouette::{Connectivity, Polarity};
use silstrike_core::spine::SpineConfig;
use silstrike_core::strike::{DetectorConfig, DirectionGate};
use silstrike_core::tracking::KinematicsConfig;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Flag values shared by `run` and `bench`, mirroring the config file keys.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct PipelineFlags {
    /// JSON config file supplying defaults for all keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Segmentation threshold in [0, 255].
    #[arg(long)]
    pub threshold: Option<u8>,
    /// Foreground polarity: dark-foreground | bright-foreground.
    #[arg(long)]
    pub polarity: Option<String>,
    /// Morphological opening iterations.
    #[arg(long)]
    pub open_iterations: Option<u32>,
    /// Blob connectivity: 4 | 8.
    #[arg(long)]
    pub connectivity: Option<String>,
    /// Minimum blob area in pixels.
    #[arg(long)]
    pub min_blob_area: Option<u32>,
    /// Side split column: "center" or a pixel column.
    #[arg(long)]
    pub split_x: Option<String>,
    /// EMA smoothing coefficient in (0, 1].
    #[arg(long)]
    pub ema_alpha: Option<f64>,
    /// Frames to hold position/velocity through a tip dropout.
    #[arg(long)]
    pub dropout_hold: Option<u32>,
    /// Dropout frames after which the track resets.
    #[arg(long)]
    pub dropout_reset: Option<u32>,
    /// Strike acceleration threshold, px/s^2.
    #[arg(long)]
    pub acc_threshold: Option<f64>,
    /// Per-side threshold override, px/s^2.
    #[arg(long)]
    pub acc_threshold_left: Option<f64>,
    /// Per-side threshold override, px/s^2.
    #[arg(long)]
    pub acc_threshold_right: Option<f64>,
    /// Refractory period, milliseconds.
    #[arg(long)]
    pub refractory_ms: Option<f64>,
    /// Direction gate: none | rebound.
    #[arg(long)]
    pub direction_gate: Option<String>,
    /// Intensity saturation factor (>= 1).
    #[arg(long)]
    pub k_sat: Option<f64>,
    /// Spine length per unit acceleration.
    #[arg(long)]
    pub spine_gain: Option<f64>,
    /// Spine length clamp, pixels.
    #[arg(long)]
    pub spine_max_len: Option<f64>,
    /// Emit a spine every k-th contour point.
    #[arg(long)]
    pub spine_stride: Option<usize>,
    /// Contour correspondence radius, pixels.
    #[arg(long)]
    pub match_radius: Option<f64>,
    /// Broadcast the tip acceleration to the whole contour instead of
    /// using local per-point motion.
    #[arg(long)]
    pub broadcast_tip_accel: bool,
}

/// The JSON config file schema. Unknown keys are rejected by name.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<String>,
    pub format: Option<String>,
    pub width: Option<u32>,
    pub height: Option<u32>,
    pub fps: Option<f64>,
    pub threshold: Option<u8>,
    pub polarity: Option<String>,
    pub open_iterations: Option<u32>,
    pub connectivity: Option<String>,
    pub min_blob_area: Option<u32>,
    pub split_x: Option<SplitSpec>,
    pub ema_alpha: Option<f64>,
    pub dropout_hold: Option<u32>,
    pub dropout_reset: Option<u32>,
    pub acc_threshold: Option<f64>,
    pub acc_threshold_left: Option<f64>,
    pub acc_threshold_right: Option<f64>,
    pub refractory_ms: Option<f64>,
    pub direction_gate: Option<String>,
    pub k_sat: Option<f64>,
    pub spine_gain: Option<f64>,
    pub spine_max_len: Option<f64>,
    pub spine_stride: Option<usize>,
    pub match_radius: Option<f64>,
    pub broadcast_tip_accel: Option<bool>,
    pub scenes: Option<String>,
    pub scene: Option<String>,
    pub osc: Option<Vec<String>>,
    pub events_out: Option<String>,
    pub spines_out: Option<String>,
    pub queue_capacity: Option<usize>,
}

/// `split_x` accepts a pixel column or the string "center".
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SplitSpec {
    At(u32),
    Named(String),
}

pub fn load_file_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))
}

pub fn parse_polarity(s: &str) -> Result<Polarity, CliError> {
    match s {
        "dark-foreground" => Ok(Polarity::DarkForeground),
        "bright-foreground" => Ok(Polarity::BrightForeground),
        other => Err(CliError::Config(format!(
            "polarity: expected dark-foreground or bright-foreground, got {other:?}"
        ))),
    }
}

pub fn parse_connectivity(s: &str) -> Result<Connectivity, CliError> {
    match s {
        "4" => Ok(Connectivity::Four),
        "8" => Ok(Connectivity::Eight),
        other => Err(CliError::Config(format!(
            "connectivity: expected 4 or 8, got {other:?}"
        ))),
    }
}

pub fn parse_direction_gate(s: &str) -> Result<DirectionGate, CliError> {
    match s {
        "none" => Ok(DirectionGate::None),
        "rebound" => Ok(DirectionGate::Rebound),
        other => Err(CliError::Config(format!(
            "direction_gate: expected none or rebound, got {other:?}"
        ))),
    }
}

pub fn parse_split(s: &str) -> Result<SplitX, CliError> {
    if s == "center" {
        return Ok(SplitX::Center);
    }
    s.parse::<u32>().map(SplitX::At).map_err(|_| {
        CliError::Config(format!(
            "split_x: expected \"center\" or a column, got {s:?}"
        ))
    })
}

fn split_from_spec(spec: &SplitSpec) -> Result<SplitX, CliError> {
    match spec {
        SplitSpec::At(x) => Ok(SplitX::At(*x)),
        SplitSpec::Named(s) => parse_split(s),
    }
}

/// Build and validate the pipeline configuration from file + flags.
/// `fps` is needed to check the refractory-versus-frame-period invariant.
pub fn resolve_pipeline(
    flags: &PipelineFlags,
    file: &FileConfig,
    fps: f64,
) -> Result<PipelineConfig, CliError> {
    let defaults = PipelineConfig::default();

    let polarity = match flags.polarity.as_deref().or(file.polarity.as_deref()) {
        Some(s) => parse_polarity(s)?,
        None => defaults.polarity,
    };
    let connectivity = match flags
        .connectivity
        .as_deref()
        .or(file.connectivity.as_deref())
    {
        Some(s) => parse_connectivity(s)?,
        None => defaults.connectivity,
    };
    let direction_gate = match flags
        .direction_gate
        .as_deref()
        .or(file.direction_gate.as_deref())
    {
        Some(s) => parse_direction_gate(s)?,
        None => defaults.detector.direction_gate,
    };
    let split_x = match (&flags.split_x, &file.split_x) {
        (Some(s), _) => parse_split(s)?,
        (None, Some(spec)) => split_from_spec(spec)?,
        (None, None) => defaults.split_x,
    };

    let ema_alpha = flags
        .ema_alpha
        .or(file.ema_alpha)
        .unwrap_or(defaults.kinematics.ema_alpha);
    if !(ema_alpha > 0.0 && ema_alpha <= 1.0) {
        return Err(CliError::Config(format!(
            "ema_alpha: must be in (0, 1], got {ema_alpha}"
        )));
    }

    let acc_threshold = flags
        .acc_threshold
        .or(file.acc_threshold)
        .unwrap_or(defaults.detector.acc_threshold);
    if acc_threshold.is_nan() || acc_threshold <= 0.0 {
        return Err(CliError::Config(format!(
            "acc_threshold: must be positive, got {acc_threshold}"
        )));
    }
    for (key, value) in [
        (
            "acc_threshold_left",
            flags.acc_threshold_left.or(file.acc_threshold_left),
        ),
        (
            "acc_threshold_right",
            flags.acc_threshold_right.or(file.acc_threshold_right),
        ),
    ] {
        if let Some(v) = value {
            if v.is_nan() || v <= 0.0 {
                return Err(CliError::Config(format!(
                    "{key}: must be positive, got {v}"
                )));
            }
        }
    }

    let refractory_ms = flags
        .refractory_ms
        .or(file.refractory_ms)
        .unwrap_or(defaults.detector.refractory_us as f64 / 1000.0);
    if refractory_ms < 0.0 {
        return Err(CliError::Config(format!(
            "refractory_ms: must be non-negative, got {refractory_ms}"
        )));
    }
    // The refractory must cover at least one frame period, otherwise a
    // single bounce can double-trigger on consecutive frames.
    let frame_period_ms = 1000.0 / fps;
    if refractory_ms < frame_period_ms {
        return Err(CliError::Config(format!(
            "refractory_ms: {refractory_ms} ms is shorter than one frame period \
             ({frame_period_ms:.3} ms at {fps} fps)"
        )));
    }

    let k_sat = flags
        .k_sat
        .or(file.k_sat)
        .unwrap_or(defaults.detector.k_sat);
    if k_sat < 1.0 {
        return Err(CliError::Config(format!(
            "k_sat: must be >= 1, got {k_sat}"
        )));
    }

    let spine_gain = flags
        .spine_gain
        .or(file.spine_gain)
        .unwrap_or(defaults.spine.gain);
    if spine_gain < 0.0 {
        return Err(CliError::Config(format!(
            "spine_gain: must be non-negative, got {spine_gain}"
        )));
    }
    let spine_stride = flags
        .spine_stride
        .or(file.spine_stride)
        .unwrap_or(defaults.spine.stride);
    if spine_stride == 0 {
        return Err(CliError::Config("spine_stride: must be >= 1".into()));
    }
    let match_radius = flags
        .match_radius
        .or(file.match_radius)
        .unwrap_or(defaults.spine.match_radius);
    if match_radius.is_nan() || match_radius <= 0.0 {
        return Err(CliError::Config(format!(
            "match_radius: must be positive, got {match_radius}"
        )));
    }

    Ok(PipelineConfig {
        threshold: flags
            .threshold
            .or(file.threshold)
            .unwrap_or(defaults.threshold),
        polarity,
        open_iterations: flags
            .open_iterations
            .or(file.open_iterations)
            .unwrap_or(defaults.open_iterations),
        connectivity,
        min_blob_area: flags
            .min_blob_area
            .or(file.min_blob_area)
            .unwrap_or(defaults.min_blob_area),
        split_x,
        kinematics: KinematicsConfig {
            ema_alpha,
            dropout_hold: flags
                .dropout_hold
                .or(file.dropout_hold)
                .unwrap_or(defaults.kinematics.dropout_hold),
            dropout_reset: flags
                .dropout_reset
                .or(file.dropout_reset)
                .unwrap_or(defaults.kinematics.dropout_reset),
        },
        detector: DetectorConfig {
            acc_threshold,
            refractory_us: (refractory_ms * 1000.0).round() as u64,
            direction_gate,
            k_sat,
        },
        acc_threshold_left: flags.acc_threshold_left.or(file.acc_threshold_left),
        acc_threshold_right: flags.acc_threshold_right.or(file.acc_threshold_right),
        spine: SpineConfig {
            gain: spine_gain,
            max_len: flags
                .spine_max_len
                .or(file.spine_max_len)
                .unwrap_or(defaults.spine.max_len),
            stride: spine_stride,
            match_radius,
        },
        spines_enabled: false, // decided by the caller (scene + sink)
        broadcast_tip_accel: flags.broadcast_tip_accel || file.broadcast_tip_accel.unwrap_or(false),
    })
}

/// Parse the input spec: "-" is stdin, anything else a path.
pub fn parse_input(s: &str) -> StreamInput {
    if s == "-" {
        StreamInput::Stdin
    } else {
        StreamInput::Path(PathBuf::from(s))
    }
}

/// Resolve the stream format; raw-y8 requires explicit dimensions.
pub fn parse_format(
    format: &str,
    width: Option<u32>,
    height: Option<u32>,
) -> Result<StreamFormat, CliError> {
    match format {
        "pgm-sequence" => Ok(StreamFormat::PgmSequence),
        "y4m" => Ok(StreamFormat::Y4m),
        "raw-y8" => {
            let (Some(width), Some(height)) = (width, height) else {
                return Err(CliError::Config(
                    "format raw-y8 requires width and height".into(),
                ));
            };
            if width == 0 || height == 0 {
                return Err(CliError::Config("width/height: must be positive".into()));
            }
            Ok(StreamFormat::RawY8 { width, height })
        }
        other => Err(CliError::Config(format!(
            "format: expected pgm-sequence, raw-y8 or y4m, got {other:?}"
        ))),
    }
}

/// Load scenes from a file (or the built-in default), validate, and apply
/// the initial scene selection.
pub fn load_scenes(
    scenes_path: Option<&Path>,
    initial: Option<&str>,
) -> Result<SceneRouter, CliError> {
    let scenes: Vec<SceneConfig> = match scenes_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("scenes file {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("scenes file {}: {e}", path.display())))?
        }
        None => vec![default_scene()],
    };
    let mut router = SceneRouter::new(scenes).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(name) = initial {
        router
            .switch_scene(name)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(router)
}
