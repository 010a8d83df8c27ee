//! The per-frame detection chain: frame -> mask -> blobs -> tips ->
//! kinematics -> strike events, with optional contour-spine geometry,
//! instrumented per stage.
//!
//! The pipeline is strictly sequential over frames (offline runs are
//! deterministic by construction); left and right side state advance
//! independently within a frame.

use crate::frame_io::Frame;
use crate::silhouette::{
    connected_components, denoise, filter_blobs, segment, Blob, Connectivity, Polarity,
};
use crate::spine::{compute_spines, point_motion, trace_contour, Contour, SpineConfig, SpineField};
use crate::strike::{DetectorConfig, StrikeDetector, StrikeEvent};
use crate::tracking::{
    extract_tips, KinematicTracker, KinematicsConfig, SideAssignment, TrackingError,
};
use crate::types::Side;
use serde::Serialize;
use std::time::Instant;

/// Where the side split falls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitX {
    Center,
    At(u32),
}

/// Everything the detection chain needs, aggregated.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub threshold: u8,
    pub polarity: Polarity,
    pub open_iterations: u32,
    pub connectivity: Connectivity,
    pub min_blob_area: u32,
    pub split_x: SplitX,
    pub kinematics: KinematicsConfig,
    pub detector: DetectorConfig,
    /// Per-side acceleration threshold overrides.
    pub acc_threshold_left: Option<f64>,
    pub acc_threshold_right: Option<f64>,
    pub spine: SpineConfig,
    /// Compute spine geometry (skipped entirely when false).
    pub spines_enabled: bool,
    /// Broadcast the tip's acceleration magnitude to every contour point
    /// instead of using local per-point motion.
    pub broadcast_tip_accel: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            threshold: 100,
            polarity: Polarity::DarkForeground,
            open_iterations: 1,
            connectivity: Connectivity::Eight,
            min_blob_area: 64,
            split_x: SplitX::Center,
            kinematics: KinematicsConfig::default(),
            detector: DetectorConfig::default(),
            acc_threshold_left: None,
            acc_threshold_right: None,
            spine: SpineConfig::default(),
            spines_enabled: false,
            broadcast_tip_accel: false,
        }
    }
}

/// Output of one frame step.
#[derive(Debug, Clone, Default)]
pub struct FrameOutput {
    pub t: u64,
    pub events: Vec<StrikeEvent>,
    pub spines: Vec<(Side, SpineField)>,
    pub blob_count: usize,
}

/// Accumulated wall-clock time per stage, microseconds.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct StageStats {
    pub frames: u64,
    pub segment_us: u64,
    pub denoise_us: u64,
    pub components_us: u64,
    pub tips_us: u64,
    pub kinematics_us: u64,
    pub detect_us: u64,
    pub spines_us: u64,
}

impl StageStats {
    pub fn total_us(&self) -> u64 {
        self.segment_us
            + self.denoise_us
            + self.components_us
            + self.tips_us
            + self.kinematics_us
            + self.detect_us
            + self.spines_us
    }

    /// Mean microseconds per frame for each stage, in declaration order.
    pub fn means(&self) -> [(&'static str, f64); 7] {
        let n = self.frames.max(1) as f64;
        [
            ("segment", self.segment_us as f64 / n),
            ("denoise", self.denoise_us as f64 / n),
            ("components", self.components_us as f64 / n),
            ("tips", self.tips_us as f64 / n),
            ("kinematics", self.kinematics_us as f64 / n),
            ("detect", self.detect_us as f64 / n),
            ("spines", self.spines_us as f64 / n),
        ]
    }
}

/// Per-side contour history for spine motion estimation.
struct SpineTrack {
    prev: Option<(Contour, Vec<f64>, u64)>,
}

/// The assembled detection pipeline for one stream.
pub struct DetectionPipeline {
    cfg: PipelineConfig,
    assignment: Option<SideAssignment>,
    trackers: [KinematicTracker; 2],
    detectors: [StrikeDetector; 2],
    spine_tracks: [SpineTrack; 2],
    pub stats: StageStats,
}

impl DetectionPipeline {
    pub fn new(cfg: PipelineConfig) -> DetectionPipeline {
        let detector_for = |side: Side| {
            let mut det_cfg = cfg.detector;
            let over = match side {
                Side::Left => cfg.acc_threshold_left,
                Side::Right => cfg.acc_threshold_right,
            };
            if let Some(threshold) = over {
                det_cfg.acc_threshold = threshold;
            }
            StrikeDetector::new(side, det_cfg)
        };
        DetectionPipeline {
            assignment: None,
            trackers: [
                KinematicTracker::new(Side::Left, cfg.kinematics),
                KinematicTracker::new(Side::Right, cfg.kinematics),
            ],
            detectors: [detector_for(Side::Left), detector_for(Side::Right)],
            spine_tracks: [SpineTrack { prev: None }, SpineTrack { prev: None }],
            cfg,
            stats: StageStats::default(),
        }
    }

    /// Process one frame through the full chain.
    pub fn process(&mut self, frame: &Frame) -> Result<FrameOutput, TrackingError> {
        let assignment = *self
            .assignment
            .get_or_insert_with(|| match self.cfg.split_x {
                SplitX::Center => SideAssignment::center(frame.width()),
                SplitX::At(x) => SideAssignment::new(x, frame.width())
                    .unwrap_or_else(|| SideAssignment::center(frame.width())),
            });

        let t0 = Instant::now();
        let raw_mask = segment(frame, self.cfg.threshold, self.cfg.polarity);
        let t1 = Instant::now();
        let mask = denoise(&raw_mask, self.cfg.open_iterations);
        let t2 = Instant::now();
        let blobs = filter_blobs(
            connected_components(&mask, self.cfg.connectivity),
            self.cfg.min_blob_area,
        );
        let t3 = Instant::now();
        let (left_tip, right_tip) = extract_tips(&blobs, assignment, frame.timestamp_us);
        let t4 = Instant::now();

        let mut output = FrameOutput {
            t: frame.timestamp_us,
            blob_count: blobs.len(),
            ..FrameOutput::default()
        };

        let mut kin_states = [None, None];
        for (i, tip) in [left_tip, right_tip].iter().enumerate() {
            kin_states[i] = Some(self.trackers[i].update(tip)?);
        }
        let t5 = Instant::now();

        for (i, kin) in kin_states.iter().enumerate() {
            let kin = kin.as_ref().expect("both sides updated");
            if let Some(event) = self.detectors[i].feed(kin) {
                output.events.push(event);
            }
        }
        let t6 = Instant::now();

        if self.cfg.spines_enabled {
            for (i, side) in [Side::Left, Side::Right].into_iter().enumerate() {
                let kin = kin_states[i].as_ref().expect("both sides updated");
                let Some(blob) = largest_blob_on(&blobs, side, assignment) else {
                    self.spine_tracks[i].prev = None;
                    continue;
                };
                let contour = trace_contour(blob);
                let field =
                    self.spine_field_for(i, contour, kin.acc_mag, &mask, frame.timestamp_us);
                output.spines.push((side, field));
            }
        }
        let t7 = Instant::now();

        self.stats.frames += 1;
        self.stats.segment_us += (t1 - t0).as_micros() as u64;
        self.stats.denoise_us += (t2 - t1).as_micros() as u64;
        self.stats.components_us += (t3 - t2).as_micros() as u64;
        self.stats.tips_us += (t4 - t3).as_micros() as u64;
        self.stats.kinematics_us += (t5 - t4).as_micros() as u64;
        self.stats.detect_us += (t6 - t5).as_micros() as u64;
        self.stats.spines_us += (t7 - t6).as_micros() as u64;

        Ok(output)
    }

    fn spine_field_for(
        &mut self,
        side_index: usize,
        contour: Contour,
        tip_acc_mag: f64,
        mask: &crate::silhouette::BinaryMask,
        t: u64,
    ) -> SpineField {
        let track = &mut self.spine_tracks[side_index];
        let (accels, speeds) = match (&track.prev, self.cfg.broadcast_tip_accel) {
            (_, true) => (vec![tip_acc_mag; contour.len()], vec![0.0; contour.len()]),
            (Some((prev, prev_speeds, prev_t)), false) => {
                let dt = (t.saturating_sub(*prev_t)) as f64 / 1e6;
                if dt > 0.0 {
                    let m =
                        point_motion(prev, &contour, prev_speeds, dt, self.cfg.spine.match_radius);
                    (m.accels, m.speeds)
                } else {
                    (vec![0.0; contour.len()], vec![0.0; contour.len()])
                }
            }
            (None, false) => (vec![0.0; contour.len()], vec![0.0; contour.len()]),
        };
        let field = compute_spines(&contour, &accels, mask, &self.cfg.spine, t);
        track.prev = Some((contour, speeds, t));
        field
    }

    /// Finalize detector episodes left open at end of stream.
    pub fn finish(&mut self) -> Vec<StrikeEvent> {
        self.detectors
            .iter_mut()
            .filter_map(|d| d.flush())
            .collect()
    }
}

/// The largest blob whose centroid falls on `side`.
fn largest_blob_on(blobs: &[Blob], side: Side, assignment: SideAssignment) -> Option<&Blob> {
    let split = assignment.split_x() as f64;
    blobs
        .iter()
        .filter(|b| match side {
            Side::Left => b.centroid.0 < split,
            Side::Right => b.centroid.0 >= split,
        })
        .max_by_key(|b| b.area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{default_duo_scripts, simulate, SimParams};

    #[test]
    fn pipeline_detects_duo_bounces() {
        let scripts = default_duo_scripts(1.0);
        let params = SimParams {
            duration: 1.0,
            ..SimParams::default()
        };
        let (frames, truth) = simulate(&scripts, &params).unwrap();
        let mut pipeline = DetectionPipeline::new(PipelineConfig::default());
        let mut events = Vec::new();
        for frame in frames {
            events.extend(pipeline.process(&frame.unwrap()).unwrap().events);
        }
        events.extend(pipeline.finish());
        // 4 per side in 1 second.
        assert!(
            events.len() >= 6,
            "expected most of the {} truth strikes, got {} events",
            truth.strikes.len(),
            events.len()
        );
        assert!(pipeline.stats.frames == 60);
    }

    #[test]
    fn event_order_is_monotone_per_side() {
        let scripts = default_duo_scripts(1.5);
        let params = SimParams {
            duration: 1.5,
            ..SimParams::default()
        };
        let (frames, _) = simulate(&scripts, &params).unwrap();
        let mut pipeline = DetectionPipeline::new(PipelineConfig::default());
        let mut events = Vec::new();
        for frame in frames {
            events.extend(pipeline.process(&frame.unwrap()).unwrap().events);
        }
        events.extend(pipeline.finish());
        for side in [Side::Left, Side::Right] {
            let ts: Vec<u64> = events
                .iter()
                .filter(|e| e.side == side)
                .map(|e| e.t)
                .collect();
            assert!(ts.windows(2).all(|p| p[0] < p[1]), "{side:?}: {ts:?}");
        }
    }

    #[test]
    fn spines_emitted_when_enabled() {
        let scripts = default_duo_scripts(0.5);
        let params = SimParams {
            duration: 0.5,
            ..SimParams::default()
        };
        let (frames, _) = simulate(&scripts, &params).unwrap();
        let cfg = PipelineConfig {
            spines_enabled: true,
            ..PipelineConfig::default()
        };
        let mut pipeline = DetectionPipeline::new(cfg);
        let mut spine_frames = 0;
        let mut total_spines = 0;
        for frame in frames {
            let out = pipeline.process(&frame.unwrap()).unwrap();
            if !out.spines.is_empty() {
                spine_frames += 1;
                total_spines += out
                    .spines
                    .iter()
                    .map(|(_, f)| f.spines.len())
                    .sum::<usize>();
            }
        }
        assert!(spine_frames > 0);
        assert!(total_spines > 0, "moving silhouettes must grow some spines");
    }

    #[test]
    fn deterministic_across_runs() {
        let scripts = default_duo_scripts(1.0);
        let params = SimParams {
            duration: 1.0,
            ..SimParams::default()
        };
        let run = || {
            let (frames, _) = simulate(&scripts, &params).unwrap();
            let mut pipeline = DetectionPipeline::new(PipelineConfig::default());
            let mut events = Vec::new();
            for frame in frames {
                events.extend(pipeline.process(&frame.unwrap()).unwrap().events);
            }
            events.extend(pipeline.finish());
            events
        };
        assert_eq!(run(), run());
    }
}
