//! silstrike-core: a real-time silhouette-based percussive-gesture
//! detection engine.
//!
//! Backlit-silhouette frames in; strike events, OSC trigger messages,
//! and contour-spine visualization geometry out. The pipeline stages:
//!
//! 1. **frame_io** — PGM/raw-Y8/Y4M decoding into timestamped grayscale frames.
//! 2. **silhouette** — fixed-threshold segmentation, morphological cleanup,
//!    connected-component blobs.
//! 3. **tracking** — per-performer stick-tip extraction and EMA-smoothed
//!    finite-difference kinematics.
//! 4. **strike** — rising-edge acceleration threshold with rebound gate and
//!    refractory period.
//! 5. **spine** — contour tracing and acceleration-scaled outward spines.
//! 6. **events** — scene-based mapping to OSC 1.0 over UDP plus a JSONL sink.
//! 7. **sim** — a synthetic two-performer simulator with ground-truth strike
//!    annotations, and precision/recall/latency scoring.
//!
//! [`pipeline::DetectionPipeline`] assembles stages 2-6 into the per-frame
//! chain the CLI drives.

pub mod events;
pub mod frame_io;
pub mod pipeline;
pub mod silhouette;
pub mod sim;
pub mod spine;
pub mod strike;
pub mod tracking;
pub mod types;

pub use types::{Side, Vec2};
