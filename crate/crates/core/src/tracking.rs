//! Stick-tip extraction and kinematics.
//!
//! Each performer's tip is the extremal silhouette pixel facing the frame
//! center: the rightmost pixel of the left performer's blobs and the
//! leftmost pixel of the right performer's. Tip positions are EMA-smoothed
//! and differentiated twice with backward differences over real time
//! deltas; backward (rather than central) differences keep the latency of
//! a live instrument at zero extra frames.

use crate::silhouette::Blob;
use crate::types::{Side, Vec2};
use thiserror::Error;

/// Vertical split dividing the frame into the two performers' regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SideAssignment {
    split_x: u32,
}

impl SideAssignment {
    /// Requires 0 < split_x < frame_width.
    pub fn new(split_x: u32, frame_width: u32) -> Option<SideAssignment> {
        if split_x > 0 && split_x < frame_width {
            Some(SideAssignment { split_x })
        } else {
            None
        }
    }

    /// Split at the frame midline.
    pub fn center(frame_width: u32) -> SideAssignment {
        SideAssignment {
            split_x: frame_width / 2,
        }
    }

    pub fn split_x(&self) -> u32 {
        self.split_x
    }
}

/// A per-frame tip observation for one side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TipSample {
    pub side: Side,
    /// Microseconds since stream start.
    pub t: u64,
    /// Pixel coordinates; meaningful only when `present`.
    pub pos: Vec2,
    pub present: bool,
}

impl TipSample {
    pub fn absent(side: Side, t: u64) -> TipSample {
        TipSample {
            side,
            t,
            pos: Vec2::ZERO,
            present: false,
        }
    }
}

/// Extract both sides' tip samples from one frame's blobs.
///
/// A blob belongs to the side its centroid falls on; the tip search is
/// then restricted to pixels within that side's region. Ties on the
/// extremal column are broken topmost (minimum y).
pub fn extract_tips(blobs: &[Blob], assignment: SideAssignment, t: u64) -> (TipSample, TipSample) {
    let split = assignment.split_x;
    let mut left_best: Option<(u32, u32)> = None; // (x, y), max x then min y
    let mut right_best: Option<(u32, u32)> = None; // (x, y), min x then min y

    for blob in blobs {
        if blob.centroid.0 < split as f64 {
            // Left performer: rightmost pixel with x <= split.
            for run in &blob.runs {
                if run.x0 > split {
                    continue;
                }
                let x = run.x1.min(split);
                let candidate = (x, run.y);
                let better = match left_best {
                    None => true,
                    Some((bx, by)) => x > bx || (x == bx && run.y < by),
                };
                if better {
                    left_best = Some(candidate);
                }
            }
        } else {
            // Right performer: leftmost pixel with x >= split.
            for run in &blob.runs {
                if run.x1 < split {
                    continue;
                }
                let x = run.x0.max(split);
                let candidate = (x, run.y);
                let better = match right_best {
                    None => true,
                    Some((bx, by)) => x < bx || (x == bx && run.y < by),
                };
                if better {
                    right_best = Some(candidate);
                }
            }
        }
    }

    let to_sample = |side: Side, best: Option<(u32, u32)>| match best {
        Some((x, y)) => TipSample {
            side,
            t,
            pos: Vec2::new(x as f64, y as f64),
            present: true,
        },
        None => TipSample::absent(side, t),
    };
    (
        to_sample(Side::Left, left_best),
        to_sample(Side::Right, right_best),
    )
}

/// Smoothing and dropout policy for the kinematic filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicsConfig {
    /// EMA coefficient in (0, 1]; 1 disables smoothing.
    pub ema_alpha: f64,
    /// Frames to hold position/velocity through a dropout before zeroing acceleration.
    pub dropout_hold: u32,
    /// Dropout length after which the filter resets entirely.
    pub dropout_reset: u32,
}

impl Default for KinematicsConfig {
    fn default() -> Self {
        KinematicsConfig {
            ema_alpha: 0.5,
            dropout_hold: 2,
            dropout_reset: 10,
        }
    }
}

/// Snapshot of one side's tip kinematics after an update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicState {
    pub side: Side,
    pub t: u64,
    /// EMA-smoothed position.
    pub pos: Vec2,
    /// Pixels per second; valid from the 2nd consecutive present sample.
    pub vel: Vec2,
    /// Pixels per second^2; valid from the 3rd consecutive present sample.
    pub acc: Vec2,
    /// Euclidean norm of `acc`.
    pub acc_mag: f64,
    /// Consecutive frames without a tip.
    pub dropout_frames: u32,
    pub vel_valid: bool,
    pub acc_valid: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum TrackingError {
    #[error("non-monotone timestamp: sample at {sample_t} us after state at {state_t} us")]
    NonMonotoneTimestamp { sample_t: u64, state_t: u64 },
    #[error("sample side {sample:?} does not match tracker side {tracker:?}")]
    SideMismatch { sample: Side, tracker: Side },
}

/// Sequential kinematic filter for one side's tip stream.
#[derive(Debug, Clone)]
pub struct KinematicTracker {
    side: Side,
    cfg: KinematicsConfig,
    state: Option<Inner>,
}

#[derive(Debug, Clone, Copy)]
struct Inner {
    t: u64,
    pos: Vec2,
    vel: Vec2,
    acc: Vec2,
    dropout_frames: u32,
    /// Consecutive present samples since the last reset.
    present_count: u32,
}

impl KinematicTracker {
    pub fn new(side: Side, cfg: KinematicsConfig) -> KinematicTracker {
        assert!(
            cfg.ema_alpha > 0.0 && cfg.ema_alpha <= 1.0,
            "ema_alpha must be in (0, 1]"
        );
        KinematicTracker {
            side,
            cfg,
            state: None,
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Advance the filter by one frame's tip sample.
    pub fn update(&mut self, sample: &TipSample) -> Result<KinematicState, TrackingError> {
        if sample.side != self.side {
            return Err(TrackingError::SideMismatch {
                sample: sample.side,
                tracker: self.side,
            });
        }
        if let Some(inner) = &self.state {
            if sample.t <= inner.t {
                return Err(TrackingError::NonMonotoneTimestamp {
                    sample_t: sample.t,
                    state_t: inner.t,
                });
            }
        }

        let alpha = self.cfg.ema_alpha;
        let next = match (self.state, sample.present) {
            (None, false) => Inner {
                t: sample.t,
                pos: Vec2::ZERO,
                vel: Vec2::ZERO,
                acc: Vec2::ZERO,
                dropout_frames: 0,
                present_count: 0,
            },
            (None, true) => Inner {
                t: sample.t,
                pos: sample.pos,
                vel: Vec2::ZERO,
                acc: Vec2::ZERO,
                dropout_frames: 0,
                present_count: 1,
            },
            (Some(prev), false) => {
                let dropout = prev.dropout_frames + 1;
                if dropout > self.cfg.dropout_reset {
                    // Tip lost for good: forget the track.
                    Inner {
                        t: sample.t,
                        pos: prev.pos,
                        vel: Vec2::ZERO,
                        acc: Vec2::ZERO,
                        dropout_frames: dropout,
                        present_count: 0,
                    }
                } else if dropout > self.cfg.dropout_hold {
                    Inner {
                        t: sample.t,
                        pos: prev.pos,
                        vel: prev.vel,
                        acc: Vec2::ZERO,
                        dropout_frames: dropout,
                        present_count: prev.present_count,
                    }
                } else {
                    Inner {
                        t: sample.t,
                        dropout_frames: dropout,
                        ..prev
                    }
                }
            }
            (Some(prev), true) => {
                if prev.present_count == 0 {
                    // Fresh track (initial state or post-reset).
                    Inner {
                        t: sample.t,
                        pos: sample.pos,
                        vel: Vec2::ZERO,
                        acc: Vec2::ZERO,
                        dropout_frames: 0,
                        present_count: 1,
                    }
                } else {
                    let dt = (sample.t - prev.t) as f64 / 1e6;
                    let pos = sample.pos * alpha + prev.pos * (1.0 - alpha);
                    let vel = (pos - prev.pos) / dt;
                    let acc = if prev.present_count >= 2 {
                        (vel - prev.vel) / dt
                    } else {
                        Vec2::ZERO
                    };
                    Inner {
                        t: sample.t,
                        pos,
                        vel,
                        acc,
                        dropout_frames: 0,
                        present_count: prev.present_count + 1,
                    }
                }
            }
        };
        self.state = Some(next);
        Ok(self.snapshot(&next))
    }

    fn snapshot(&self, inner: &Inner) -> KinematicState {
        KinematicState {
            side: self.side,
            t: inner.t,
            pos: inner.pos,
            vel: inner.vel,
            acc: inner.acc,
            acc_mag: inner.acc.norm(),
            dropout_frames: inner.dropout_frames,
            vel_valid: inner.present_count >= 2,
            acc_valid: inner.present_count >= 3,
        }
    }
}
