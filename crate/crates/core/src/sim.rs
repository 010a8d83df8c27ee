//! Synthetic performance footage with ground-truth strike annotations.
//!
//! Each performer is a static shoulder-elbow-wrist arm capsule plus a
//! stick (rotated rectangle) pivoting about the wrist, rendered as a
//! dark silhouette against a lit screen. The bounce motion is kinematic,
//! not dynamic: the stick raise angle follows
//! `theta(t) = max_angle * |cos(pi * t / period)|`, mapped so the tip
//! meets the drum line exactly at theta = 0 — one contact per period,
//! half a period after the segment starts, each recorded as ground truth.
//!
//! Everything is deterministic given (scripts, params, seed), so every
//! detection claim downstream can be scored without cameras or stages.

use crate::frame_io::{synth_timestamp_us, Frame, FrameSource};
use crate::strike::StrikeEvent;
use crate::types::{Side, Vec2};
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lit-screen background luma.
const BACKGROUND_LUMA: f64 = 230.0;
/// Occluding silhouette luma.
const SILHOUETTE_LUMA: f64 = 15.0;
/// Arm capsule radius as a multiple of stick width.
const ARM_RADIUS_FACTOR: f64 = 1.25;
/// Stick raise angle held outside any motion segment, radians.
const DEFAULT_REST_ANGLE: f64 = 0.5;

/// One motion segment. Segments must be sorted and non-overlapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionSegment {
    /// Seconds since stream start.
    pub start_t: f64,
    /// Seconds; the segment covers `[start_t, start_t + duration)`.
    pub duration: f64,
    #[serde(flatten)]
    pub kind: MotionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MotionKind {
    /// Hold the stick still. With `drum_y` set, `angle` is the raise
    /// above the drum-contact direction (matching a bounce's pose at the
    /// same angle); otherwise it is measured down from horizontal-forward.
    Rest {
        #[serde(default = "default_rest_angle")]
        angle: f64,
        #[serde(default)]
        drum_y: Option<f64>,
    },
    /// Strike the drum line once per period.
    Bounce {
        drum_y: f64,
        period: f64,
        max_angle: f64,
    },
    /// Linear sweep of the stick direction, angles down from
    /// horizontal-forward.
    Sweep { from_angle: f64, to_angle: f64 },
}

fn default_rest_angle() -> f64 {
    DEFAULT_REST_ANGLE
}

/// Geometry and choreography for one performer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformerScript {
    pub side: Side,
    /// Fixed shoulder position, pixels.
    pub shoulder: (f64, f64),
    pub arm_len: f64,
    pub stick_len: f64,
    pub stick_width: f64,
    pub motion: Vec<MotionSegment>,
}

/// One annotated strike instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthStrike {
    pub t: u64,
    pub side: Side,
    pub x: f64,
    pub y: f64,
}

/// All strike instants of a simulation, sorted by time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    pub strikes: Vec<TruthStrike>,
}

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("geometry out of bounds: {0}")]
    GeometryOutOfBounds(String),
    #[error("invalid script: {0}")]
    InvalidScript(String),
}

/// Imaging parameters for a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub width: u32,
    pub height: u32,
    pub fps: f64,
    /// Seconds of footage.
    pub duration: f64,
    /// Gaussian pixel noise, luma standard deviation.
    pub noise_stddev: f64,
    pub seed: u64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            width: 320,
            height: 240,
            fps: 60.0,
            duration: 3.0,
            noise_stddev: 4.0,
            seed: 1,
        }
    }
}

// ---------------------------------------------------------------------------
// Pose model
// ---------------------------------------------------------------------------

/// Static arm joints derived from the shoulder.
struct ArmPose {
    shoulder: Vec2,
    elbow: Vec2,
    wrist: Vec2,
}

fn arm_pose(script: &PerformerScript) -> ArmPose {
    let facing = script.side.facing();
    let shoulder = Vec2::new(script.shoulder.0, script.shoulder.1);
    let elbow = shoulder + Vec2::new(facing * 0.5 * script.arm_len, 0.35 * script.arm_len);
    let wrist = elbow + Vec2::new(facing * 0.5 * script.arm_len, -0.15 * script.arm_len);
    ArmPose {
        shoulder,
        elbow,
        wrist,
    }
}

/// Unit direction from the wrist to the drum contact point.
fn contact_direction(script: &PerformerScript, wrist: Vec2, drum_y: f64) -> Result<Vec2, SimError> {
    let dy = drum_y - wrist.y;
    let len = script.stick_len;
    if dy.abs() > len {
        return Err(SimError::GeometryOutOfBounds(format!(
            "side {}: drum_y {} unreachable from wrist y {} with stick length {}",
            script.side, drum_y, wrist.y, len
        )));
    }
    let dx = script.side.facing() * (len * len - dy * dy).sqrt();
    Ok(Vec2::new(dx / len, dy / len))
}

/// Rotate `v` by `angle` such that positive angles lift the tip
/// (screen-up) for either facing.
fn lift(v: Vec2, angle: f64, facing: f64) -> Vec2 {
    let a = -facing * angle;
    Vec2::new(a.cos() * v.x - a.sin() * v.y, a.sin() * v.x + a.cos() * v.y)
}

/// Stick direction (unit) at absolute time `t` seconds.
fn stick_direction(script: &PerformerScript, wrist: Vec2, t: f64) -> Result<Vec2, SimError> {
    let facing = script.side.facing();
    let segment = script
        .motion
        .iter()
        .find(|s| t >= s.start_t && t < s.start_t + s.duration);
    match segment.map(|s| (&s.kind, t - s.start_t)) {
        Some((
            MotionKind::Bounce {
                drum_y,
                period,
                max_angle,
            },
            local_t,
        )) => {
            let contact = contact_direction(script, wrist, *drum_y)?;
            let theta = max_angle * (std::f64::consts::PI * local_t / period).cos().abs();
            Ok(lift(contact, theta, facing))
        }
        Some((
            MotionKind::Rest {
                angle,
                drum_y: Some(drum_y),
            },
            _,
        )) => {
            let contact = contact_direction(script, wrist, *drum_y)?;
            Ok(lift(contact, *angle, facing))
        }
        Some((
            MotionKind::Rest {
                angle,
                drum_y: None,
            },
            _,
        )) => Ok(Vec2::new(facing * angle.cos(), angle.sin())),
        Some((
            MotionKind::Sweep {
                from_angle,
                to_angle,
            },
            local_t,
        )) => {
            let span = segment.unwrap().duration;
            let phi = from_angle + (to_angle - from_angle) * (local_t / span);
            Ok(Vec2::new(facing * phi.cos(), phi.sin()))
        }
        None => {
            let a = DEFAULT_REST_ANGLE;
            Ok(Vec2::new(facing * a.cos(), a.sin()))
        }
    }
}

/// Analytic stick tip position at time `t` seconds.
pub fn tip_position(script: &PerformerScript, t: f64) -> Result<Vec2, SimError> {
    let pose = arm_pose(script);
    let dir = stick_direction(script, pose.wrist, t)?;
    Ok(pose.wrist + dir * script.stick_len)
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

fn validate_script(script: &PerformerScript, params: &SimParams) -> Result<(), SimError> {
    if script.arm_len <= 0.0 || script.stick_len <= 0.0 || script.stick_width <= 0.0 {
        return Err(SimError::InvalidScript(format!(
            "side {}: arm_len, stick_len and stick_width must be positive",
            script.side
        )));
    }
    let mut prev_end = 0.0f64;
    for (i, seg) in script.motion.iter().enumerate() {
        if seg.duration <= 0.0 || seg.start_t < 0.0 {
            return Err(SimError::InvalidScript(format!(
                "side {}: segment {i} has non-positive duration or negative start",
                script.side
            )));
        }
        if i > 0 && seg.start_t < prev_end {
            return Err(SimError::InvalidScript(format!(
                "side {}: segment {i} overlaps the previous one",
                script.side
            )));
        }
        if let MotionKind::Bounce {
            period, max_angle, ..
        } = &seg.kind
        {
            if *period <= 0.0 {
                return Err(SimError::InvalidScript(format!(
                    "side {}: segment {i} bounce period must be positive",
                    script.side
                )));
            }
            if !(0.0..=std::f64::consts::FRAC_PI_2).contains(max_angle) {
                return Err(SimError::InvalidScript(format!(
                    "side {}: segment {i} max_angle must be in [0, pi/2]",
                    script.side
                )));
            }
        }
        prev_end = seg.start_t + seg.duration;
    }

    // Sweep the whole pose timeline densely and require a margin inside
    // the frame for every primitive.
    let pose = arm_pose(script);
    let margin = ARM_RADIUS_FACTOR * script.stick_width + 1.5;
    let inside = |p: Vec2, what: &str| -> Result<(), SimError> {
        if p.x < margin
            || p.y < margin
            || p.x > params.width as f64 - 1.0 - margin
            || p.y > params.height as f64 - 1.0 - margin
        {
            Err(SimError::GeometryOutOfBounds(format!(
                "side {}: {what} at ({:.1}, {:.1}) leaves the {}x{} frame",
                script.side, p.x, p.y, params.width, params.height
            )))
        } else {
            Ok(())
        }
    };
    inside(pose.shoulder, "shoulder")?;
    inside(pose.elbow, "elbow")?;
    inside(pose.wrist, "wrist")?;

    let samples = 2048;
    for k in 0..=samples {
        let t = params.duration * k as f64 / samples as f64;
        let tip = tip_position(script, t)?;
        inside(tip, "stick tip")?;
    }
    // Sample each segment interior too, in case segments are much shorter
    // than the global sampling step.
    for seg in &script.motion {
        for k in 0..=256 {
            let t = seg.start_t + seg.duration * k as f64 / 256.0;
            if t < params.duration {
                inside(tip_position(script, t)?, "stick tip")?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

fn dist_to_segment(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let u = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * u)
}

/// True when `p` is inside the stick rectangle from `w` along `dir`.
fn in_stick(p: Vec2, w: Vec2, dir: Vec2, len: f64, width: f64) -> bool {
    let rel = p - w;
    let along = rel.dot(dir);
    if !(0.0..=len).contains(&along) {
        return false;
    }
    let across = rel.dot(dir.perp());
    across.abs() <= width / 2.0
}

/// Render the noiseless silhouette frame at absolute time `t` seconds.
/// The returned frame has timestamp 0; streaming callers stamp it.
pub fn render_frame(
    scripts: &[PerformerScript],
    width: u32,
    height: u32,
    t: f64,
) -> Result<Frame, SimError> {
    let mut luma = vec![BACKGROUND_LUMA as u8; width as usize * height as usize];
    for script in scripts {
        let pose = arm_pose(script);
        let dir = stick_direction(script, pose.wrist, t)?;
        let tip = pose.wrist + dir * script.stick_len;
        let arm_radius = ARM_RADIUS_FACTOR * script.stick_width;

        // Paint only the bounding box of the performer's primitives.
        let pad = arm_radius.max(script.stick_width) + 1.0;
        let xs = [pose.shoulder.x, pose.elbow.x, pose.wrist.x, tip.x];
        let ys = [pose.shoulder.y, pose.elbow.y, pose.wrist.y, tip.y];
        let x0 = (xs.iter().cloned().fold(f64::MAX, f64::min) - pad)
            .floor()
            .max(0.0) as u32;
        let y0 = (ys.iter().cloned().fold(f64::MAX, f64::min) - pad)
            .floor()
            .max(0.0) as u32;
        let x1 = (xs.iter().cloned().fold(f64::MIN, f64::max) + pad)
            .ceil()
            .min(width as f64 - 1.0) as u32;
        let y1 = (ys.iter().cloned().fold(f64::MIN, f64::max) + pad)
            .ceil()
            .min(height as f64 - 1.0) as u32;

        for y in y0..=y1 {
            for x in x0..=x1 {
                let p = Vec2::new(x as f64, y as f64);
                let dark = dist_to_segment(p, pose.shoulder, pose.elbow) <= arm_radius
                    || dist_to_segment(p, pose.elbow, pose.wrist) <= arm_radius
                    || in_stick(p, pose.wrist, dir, script.stick_len, script.stick_width);
                if dark {
                    luma[y as usize * width as usize + x as usize] = SILHOUETTE_LUMA as u8;
                }
            }
        }
    }
    Ok(Frame::new(width, height, 0, luma))
}

/// Deterministic Gaussian sampler (polar Box-Muller over ChaCha8).
struct GaussianNoise {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianNoise {
    fn new(seed: u64) -> GaussianNoise {
        GaussianNoise {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn sample(&mut self) -> f64 {
        if let Some(s) = self.spare.take() {
            return s;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * m);
                return u * m;
            }
        }
    }
}

fn add_noise(frame: &mut Frame, stddev: f64, noise: &mut GaussianNoise) {
    if stddev <= 0.0 {
        return;
    }
    let width = frame.width();
    let height = frame.height();
    let mut luma = frame.luma().to_vec();
    for px in luma.iter_mut() {
        let v = *px as f64 + stddev * noise.sample();
        *px = v.round().clamp(0.0, 255.0) as u8;
    }
    *frame = Frame::new(width, height, frame.timestamp_us, luma);
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

/// Analytic ground truth: one contact per bounce period, half a period
/// after the segment starts, while inside both the segment and the run.
fn ground_truth(scripts: &[PerformerScript], params: &SimParams) -> Result<GroundTruth, SimError> {
    let mut strikes = Vec::new();
    for script in scripts {
        let pose = arm_pose(script);
        for seg in &script.motion {
            let MotionKind::Bounce { drum_y, period, .. } = &seg.kind else {
                continue;
            };
            let contact = contact_direction(script, pose.wrist, *drum_y)?;
            let contact_pos = pose.wrist + contact * script.stick_len;
            let mut k = 0u64;
            loop {
                let t = seg.start_t + (k as f64 + 0.5) * period;
                if t >= seg.start_t + seg.duration || t >= params.duration {
                    break;
                }
                strikes.push(TruthStrike {
                    t: (t * 1e6).round() as u64,
                    side: script.side,
                    x: contact_pos.x,
                    y: contact_pos.y,
                });
                k += 1;
            }
        }
    }
    strikes.sort_by_key(|s| s.t);
    Ok(GroundTruth { strikes })
}

/// Run a simulation: a lazily generated frame stream plus its ground
/// truth. Fully deterministic given scripts, params, and seed.
pub fn simulate(
    scripts: &[PerformerScript],
    params: &SimParams,
) -> Result<(FrameSource, GroundTruth), SimError> {
    if scripts.is_empty() || scripts.len() > 2 {
        return Err(SimError::InvalidScript(format!(
            "expected one or two performer scripts, got {}",
            scripts.len()
        )));
    }
    if scripts.len() == 2 && scripts[0].side == scripts[1].side {
        return Err(SimError::InvalidScript(
            "two scripts must be on opposite sides".into(),
        ));
    }
    let positive = |v: f64| !v.is_nan() && v > 0.0;
    if !positive(params.fps) || !positive(params.duration) {
        return Err(SimError::InvalidScript(
            "fps and duration must be positive".into(),
        ));
    }
    for script in scripts {
        validate_script(script, params)?;
    }

    let truth = ground_truth(scripts, params)?;
    let frame_count = (params.fps * params.duration).round() as u64;
    let scripts_owned: Vec<PerformerScript> = scripts.to_vec();
    let p = *params;
    let mut noise = GaussianNoise::new(p.seed);

    let iter = (0..frame_count).map(move |i| {
        let t = i as f64 / p.fps;
        let mut frame = render_frame(&scripts_owned, p.width, p.height, t)
            .expect("scripts validated before streaming");
        frame.timestamp_us = synth_timestamp_us(i, p.fps);
        add_noise(&mut frame, p.noise_stddev, &mut noise);
        Ok(frame)
    });

    Ok((
        FrameSource::from_iter(params.width, params.height, params.fps, iter),
        truth,
    ))
}

// ---------------------------------------------------------------------------
// Built-in scripts
// ---------------------------------------------------------------------------

/// Two performers facing each other across the midline of a 320x240
/// frame, both playing steady bounces at 4 strikes per second.
pub fn default_duo_scripts(duration: f64) -> Vec<PerformerScript> {
    let bounce = MotionSegment {
        start_t: 0.0,
        duration,
        kind: MotionKind::Bounce {
            drum_y: 170.0,
            period: 0.25,
            max_angle: 0.9,
        },
    };
    vec![
        PerformerScript {
            side: Side::Left,
            shoulder: (14.0, 120.0),
            arm_len: 60.0,
            stick_len: 70.0,
            stick_width: 5.0,
            motion: vec![bounce.clone()],
        },
        PerformerScript {
            side: Side::Right,
            shoulder: (306.0, 120.0),
            arm_len: 60.0,
            stick_len: 70.0,
            stick_width: 5.0,
            motion: vec![bounce],
        },
    ]
}

/// A two-handed roll: each side bounces at 6 Hz, phase-offset by half a
/// bounce so the combined strike rate is 12 Hz.
pub fn dense_roll_scripts(duration: f64) -> Vec<PerformerScript> {
    let period = 1.0 / 6.0;
    let left_bounce = MotionSegment {
        start_t: 0.0,
        duration,
        kind: MotionKind::Bounce {
            drum_y: 170.0,
            period,
            max_angle: 0.55,
        },
    };
    // The right hand leads with a rest at the bounce's starting pose so
    // the handover is continuous, then bounces half a period later.
    let offset = period / 2.0;
    let right_rest = MotionSegment {
        start_t: 0.0,
        duration: offset,
        kind: MotionKind::Rest {
            angle: 0.55,
            drum_y: Some(170.0),
        },
    };
    let right_bounce = MotionSegment {
        start_t: offset,
        duration: duration - offset,
        kind: MotionKind::Bounce {
            drum_y: 170.0,
            period,
            max_angle: 0.55,
        },
    };
    vec![
        PerformerScript {
            side: Side::Left,
            shoulder: (14.0, 120.0),
            arm_len: 60.0,
            stick_len: 70.0,
            stick_width: 5.0,
            motion: vec![left_bounce],
        },
        PerformerScript {
            side: Side::Right,
            shoulder: (306.0, 120.0),
            arm_len: 60.0,
            stick_len: 70.0,
            stick_width: 5.0,
            motion: vec![right_rest, right_bounce],
        },
    ]
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Match quality for one side (or the whole run).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchStats {
    pub events: usize,
    pub truths: usize,
    pub matched: usize,
    pub precision: f64,
    pub recall: f64,
    /// True when there were no events, making precision vacuously 1.
    pub vacuous_precision: bool,
    /// True when there were no truth strikes, making recall vacuously 1.
    pub vacuous_recall: bool,
    /// Signed mean of (event.t - truth.t) over matches, microseconds.
    pub mean_latency_us: Option<f64>,
    pub false_positives: usize,
    pub misses: usize,
}

/// Detection metrics at a given matching tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub tol_us: u64,
    pub overall: MatchStats,
    pub left: MatchStats,
    pub right: MatchStats,
}

/// Score events against ground truth: greedy one-to-one matching of each
/// event (in time order) to the nearest unmatched same-side truth strike
/// within `tol_us`.
pub fn evaluate(events: &[StrikeEvent], truth: &GroundTruth, tol_us: u64) -> EvalReport {
    assert!(tol_us > 0, "tolerance must be positive");
    let side_stats = |side: Option<Side>| -> MatchStats {
        let evs: Vec<&StrikeEvent> = events
            .iter()
            .filter(|e| side.is_none_or(|s| e.side == s))
            .collect();
        let truths: Vec<&TruthStrike> = truth
            .strikes
            .iter()
            .filter(|t| side.is_none_or(|s| t.side == s))
            .collect();

        let mut taken = vec![false; truths.len()];
        let mut latencies = Vec::new();
        for e in &evs {
            let mut best: Option<(u64, usize)> = None;
            for (i, t) in truths.iter().enumerate() {
                if taken[i] || t.side != e.side {
                    continue;
                }
                let d = e.t.abs_diff(t.t);
                if d <= tol_us && best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, i));
                }
            }
            if let Some((_, i)) = best {
                taken[i] = true;
                latencies.push(e.t as f64 - truths[i].t as f64);
            }
        }
        let matched = latencies.len();
        MatchStats {
            events: evs.len(),
            truths: truths.len(),
            matched,
            precision: if evs.is_empty() {
                1.0
            } else {
                matched as f64 / evs.len() as f64
            },
            recall: if truths.is_empty() {
                1.0
            } else {
                matched as f64 / truths.len() as f64
            },
            vacuous_precision: evs.is_empty(),
            vacuous_recall: truths.is_empty(),
            mean_latency_us: if matched == 0 {
                None
            } else {
                Some(latencies.iter().sum::<f64>() / matched as f64)
            },
            false_positives: evs.len() - matched,
            misses: truths.len() - matched,
        }
    };

    EvalReport {
        tol_us,
        overall: side_stats(None),
        left: side_stats(Some(Side::Left)),
        right: side_stats(Some(Side::Right)),
    }
}
