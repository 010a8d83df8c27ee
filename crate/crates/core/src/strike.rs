//! Percussive strike detection from tip kinematics.
//!
//! A strike is a rising-edge crossing of the acceleration-magnitude
//! threshold, optionally gated on a velocity sign reversal (the bounce
//! signature of a stick leaving a drum head), and rate-limited by a
//! per-side refractory period. The event carries the peak acceleration
//! reached while above threshold but is timestamped at the crossing
//! sample, which is also the instant the refractory clock uses.
//!
//! The detector is intentionally instrument-blind: any trajectory whose
//! acceleration exceeds the threshold triggers, so air drumming works
//! exactly like striking a physical instrument.

use crate::tracking::KinematicState;
use crate::types::{Side, Vec2};
use serde::{Deserialize, Serialize};

/// Optional directional condition on top of the threshold crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionGate {
    /// Threshold crossing alone triggers.
    None,
    /// Additionally require a velocity sign reversal along the dominant
    /// acceleration axis within the last two samples.
    Rebound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Pixels per second^2; must be positive.
    pub acc_threshold: f64,
    /// Minimum microseconds between events on one side.
    pub refractory_us: u64,
    pub direction_gate: DirectionGate,
    /// Saturation factor for intensity mapping; >= 1.
    pub k_sat: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            // Default tuned on the simulator's bounce scripts at 320x240 /
            // 60 fps: smooth swing acceleration stays under ~12k px/s^2
            // while impact spikes exceed ~45k px/s^2 after EMA smoothing.
            acc_threshold: 25_000.0,
            refractory_us: 80_000,
            direction_gate: DirectionGate::Rebound,
            k_sat: 4.0,
        }
    }
}

/// A detected percussive gesture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrikeEvent {
    pub side: Side,
    /// Timestamp of the threshold-crossing sample, microseconds.
    pub t: u64,
    /// Tip position at the crossing, pixels.
    pub x: f64,
    pub y: f64,
    /// Maximum acceleration magnitude reached while above threshold.
    pub peak_acc: f64,
    /// Normalized gesture energy in [0, 1].
    pub intensity: f64,
}

/// Map a peak acceleration to [0, 1]: linear in `peak_acc` up to
/// saturation at `k_sat * acc_threshold`.
pub fn intensity_of(peak_acc: f64, cfg: &DetectorConfig) -> f64 {
    (peak_acc / (cfg.k_sat * cfg.acc_threshold)).min(1.0)
}

/// An armed event: crossing accepted, peak still accumulating.
#[derive(Debug, Clone, Copy)]
struct Pending {
    t: u64,
    pos: Vec2,
    peak_acc: f64,
}

/// Per-side stream detector. Feed kinematic states strictly in frame
/// order; call [`StrikeDetector::flush`] at end of stream to finalize a
/// crossing still above threshold.
#[derive(Debug, Clone)]
pub struct StrikeDetector {
    side: Side,
    cfg: DetectorConfig,
    above: bool,
    /// Velocities at the last three samples, newest last.
    vel_window: [Vec2; 3],
    vel_seen: u32,
    last_event_t: Option<u64>,
    pending: Option<Pending>,
}

impl StrikeDetector {
    pub fn new(side: Side, cfg: DetectorConfig) -> StrikeDetector {
        assert!(cfg.acc_threshold > 0.0, "acc_threshold must be positive");
        assert!(cfg.k_sat >= 1.0, "k_sat must be >= 1");
        StrikeDetector {
            side,
            cfg,
            above: false,
            vel_window: [Vec2::ZERO; 3],
            vel_seen: 0,
            last_event_t: None,
            pending: None,
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Process one kinematic sample; returns an event once its
    /// above-threshold episode has completed.
    pub fn feed(&mut self, kin: &KinematicState) -> Option<StrikeEvent> {
        debug_assert_eq!(kin.side, self.side);

        self.vel_window = [self.vel_window[1], self.vel_window[2], kin.vel];
        self.vel_seen = (self.vel_seen + 1).min(3);

        // Pre-warm-up acceleration is undefined; treat it as quiet.
        let acc_mag = if kin.acc_valid { kin.acc_mag } else { 0.0 };
        let now_above = acc_mag >= self.cfg.acc_threshold;
        let mut emitted = None;

        if now_above && !self.above {
            // Rising edge: arm an event if the refractory window has
            // passed and the direction gate agrees.
            let refractory_ok = match self.last_event_t {
                Some(prev) => kin.t.saturating_sub(prev) >= self.cfg.refractory_us,
                None => true,
            };
            let gate_ok = match self.cfg.direction_gate {
                DirectionGate::None => true,
                DirectionGate::Rebound => self.rebound_signature(kin.acc),
            };
            if refractory_ok && gate_ok {
                self.pending = Some(Pending {
                    t: kin.t,
                    pos: kin.pos,
                    peak_acc: acc_mag,
                });
                self.last_event_t = Some(kin.t);
            }
        } else if now_above {
            if let Some(p) = &mut self.pending {
                p.peak_acc = p.peak_acc.max(acc_mag);
            }
        } else if self.above {
            // Falling edge: the episode's peak is final.
            emitted = self.take_pending();
        }

        self.above = now_above;
        emitted
    }

    /// Finalize an episode left open at end of stream.
    pub fn flush(&mut self) -> Option<StrikeEvent> {
        self.above = false;
        self.take_pending()
    }

    fn take_pending(&mut self) -> Option<StrikeEvent> {
        let p = self.pending.take()?;
        Some(StrikeEvent {
            side: self.side,
            t: p.t,
            x: p.pos.x,
            y: p.pos.y,
            peak_acc: p.peak_acc,
            intensity: intensity_of(p.peak_acc, &self.cfg),
        })
    }

    /// True when the velocity component along the dominant acceleration
    /// axis changed sign within the last two sample transitions.
    fn rebound_signature(&self, acc: Vec2) -> bool {
        if self.vel_seen < 2 {
            return false;
        }
        let axis_is_x = acc.x.abs() >= acc.y.abs();
        let component = |v: Vec2| if axis_is_x { v.x } else { v.y };
        let window = if self.vel_seen == 2 {
            &self.vel_window[1..]
        } else {
            &self.vel_window[..]
        };
        window
            .windows(2)
            .any(|pair| sign_reversal(component(pair[0]), component(pair[1])))
    }
}

fn sign_reversal(a: f64, b: f64) -> bool {
    a * b < 0.0 || (a * b == 0.0 && (a != 0.0 || b != 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(side: Side, t: u64, vel: Vec2, acc: Vec2) -> KinematicState {
        KinematicState {
            side,
            t,
            pos: Vec2::new(100.0, 100.0),
            vel,
            acc,
            acc_mag: acc.norm(),
            dropout_frames: 0,
            vel_valid: true,
            acc_valid: true,
        }
    }

    fn cfg(threshold: f64, refractory_us: u64, gate: DirectionGate) -> DetectorConfig {
        DetectorConfig {
            acc_threshold: threshold,
            refractory_us,
            direction_gate: gate,
            k_sat: 2.0,
        }
    }

    /// Feed a stream of (t, vel_y, acc_y) triples and collect events.
    fn run(detector: &mut StrikeDetector, stream: &[(u64, f64, f64)]) -> Vec<StrikeEvent> {
        let mut events = Vec::new();
        for &(t, vy, ay) in stream {
            let s = state(detector.side(), t, Vec2::new(0.0, vy), Vec2::new(0.0, ay));
            events.extend(detector.feed(&s));
        }
        events.extend(detector.flush());
        events
    }

    #[test]
    fn below_threshold_never_triggers() {
        let mut d = StrikeDetector::new(Side::Left, cfg(1000.0, 0, DirectionGate::None));
        let stream: Vec<(u64, f64, f64)> = (0..100).map(|k| (k * 16_667, 5.0, 900.0)).collect();
        assert!(run(&mut d, &stream).is_empty());
    }

    #[test]
    fn sustained_crossing_yields_one_event_with_peak() {
        let mut d = StrikeDetector::new(Side::Left, cfg(1000.0, 0, DirectionGate::None));
        let stream = [
            (0, 1.0, 100.0),
            (10_000, 1.0, 1500.0), // crossing
            (20_000, 1.0, 2500.0), // peak
            (30_000, 1.0, 1200.0),
            (40_000, 1.0, 100.0), // falls below -> emit
            (50_000, 1.0, 100.0),
        ];
        let events = run(&mut d, &stream);
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].t, 10_000);
        assert_eq!(events[0].peak_acc, 2500.0);
        // k_sat = 2: intensity = 2500 / (2 * 1000) = 1.0 ... clamped
        assert_eq!(events[0].intensity, 1.0);
    }

    #[test]
    fn stream_ending_above_threshold_flushes_event() {
        let mut d = StrikeDetector::new(Side::Left, cfg(1000.0, 0, DirectionGate::None));
        let stream = [(0, 1.0, 10.0), (10_000, 1.0, 5000.0), (20_000, 1.0, 6000.0)];
        let events = run(&mut d, &stream);
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].peak_acc, 6000.0);
    }

    #[test]
    fn refractory_suppresses_close_crossings() {
        // Two crossings 5 ms apart with a 100 ms refractory: one event.
        let mut d = StrikeDetector::new(Side::Left, cfg(1000.0, 100_000, DirectionGate::None));
        let stream = [
            (0, 1.0, 10.0),
            (1_000, 1.0, 2000.0),
            (2_000, 1.0, 10.0),
            (6_000, 1.0, 2000.0), // 5 ms after the first crossing
            (7_000, 1.0, 10.0),
        ];
        let events = run(&mut d, &stream);
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].t, 1_000);
    }

    #[test]
    fn events_respect_refractory_spacing() {
        let refractory = 50_000u64;
        let mut d = StrikeDetector::new(Side::Left, cfg(1000.0, refractory, DirectionGate::None));
        // Crossings every 20 ms; only every third can fire.
        let mut stream = Vec::new();
        for k in 0..30u64 {
            stream.push((k * 20_000, 1.0, 5000.0));
            stream.push((k * 20_000 + 10_000, 1.0, 10.0));
        }
        let events = run(&mut d, &stream);
        assert!(events.len() > 1);
        for pair in events.windows(2) {
            assert!(pair[1].t - pair[0].t >= refractory);
        }
    }

    #[test]
    fn rebound_gate_requires_velocity_reversal() {
        // No reversal: velocity stays positive through the spike.
        let mut d = StrikeDetector::new(Side::Left, cfg(1000.0, 0, DirectionGate::Rebound));
        let no_reversal = [
            (0, 5.0, 10.0),
            (10_000, 5.0, 10.0),
            (20_000, 5.0, 9000.0),
            (30_000, 5.0, 10.0),
        ];
        assert!(run(&mut d, &no_reversal).is_empty());

        // Reversal at the crossing sample: emits.
        let mut d = StrikeDetector::new(Side::Left, cfg(1000.0, 0, DirectionGate::Rebound));
        let bounce = [
            (0, 5.0, 10.0),
            (10_000, 5.0, 10.0),
            (20_000, -5.0, 9000.0), // velocity flipped, acc spike
            (30_000, -5.0, 10.0),
        ];
        let events = run(&mut d, &bounce);
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].t, 20_000);
    }

    #[test]
    fn rebound_gate_accepts_reversal_one_sample_earlier() {
        let mut d = StrikeDetector::new(Side::Left, cfg(1000.0, 0, DirectionGate::Rebound));
        let bounce = [
            (0, 5.0, 10.0),
            (10_000, -5.0, 10.0),   // reversal here
            (20_000, -5.0, 9000.0), // spike one sample later
            (30_000, -5.0, 10.0),
        ];
        assert_eq!(run(&mut d, &bounce).len(), 1);
    }

    #[test]
    fn gate_none_triggers_without_reversal() {
        let mut d = StrikeDetector::new(Side::Left, cfg(1000.0, 0, DirectionGate::None));
        let stream = [(0, 5.0, 10.0), (10_000, 5.0, 9000.0), (20_000, 5.0, 10.0)];
        assert_eq!(run(&mut d, &stream).len(), 1);
    }

    #[test]
    fn detection_commutes_with_y_reflection_when_ungated() {
        let trajectory: Vec<(u64, f64, f64)> = (0..40u64)
            .map(|k| {
                let t = k * 16_667;
                let acc = if k % 13 == 5 { 8000.0 } else { 300.0 };
                (t, (k as f64 * 0.7).sin() * 50.0, acc)
            })
            .collect();
        let reflected: Vec<(u64, f64, f64)> =
            trajectory.iter().map(|&(t, v, a)| (t, -v, -a)).collect();

        let mut d1 = StrikeDetector::new(Side::Left, cfg(1000.0, 0, DirectionGate::None));
        let mut d2 = StrikeDetector::new(Side::Left, cfg(1000.0, 0, DirectionGate::None));
        let e1 = run(&mut d1, &trajectory);
        let e2 = run(&mut d2, &reflected);
        assert_eq!(e1.len(), e2.len());
        for (a, b) in e1.iter().zip(&e2) {
            assert_eq!(a.t, b.t);
            assert_eq!(a.peak_acc, b.peak_acc);
        }
    }

    #[test]
    fn air_drumming_triggers_without_any_instrument() {
        // A reversal spike with no relation to any geometry still fires.
        let mut d = StrikeDetector::new(Side::Right, DetectorConfig::default());
        let spike = DetectorConfig::default().acc_threshold * 3.0;
        let stream = [
            (0, 200.0, 100.0),
            (16_667, 200.0, 100.0),
            (33_333, -200.0, spike),
            (50_000, -180.0, 100.0),
        ];
        assert_eq!(run(&mut d, &stream).len(), 1);
    }

    #[test]
    fn pre_warmup_samples_are_quiet() {
        let mut d = StrikeDetector::new(Side::Left, cfg(1000.0, 0, DirectionGate::None));
        let mut s = state(Side::Left, 1000, Vec2::new(0.0, 5.0), Vec2::new(0.0, 1e9));
        s.acc_valid = false;
        assert!(d.feed(&s).is_none());
        assert!(d.flush().is_none());
    }

    #[test]
    fn intensity_mapping() {
        let c = cfg(1000.0, 0, DirectionGate::None); // k_sat = 2
        assert_eq!(intensity_of(1000.0, &c), 0.5);
        assert_eq!(intensity_of(10.0 * 2.0 * 1000.0, &c), 1.0);
        assert_eq!(intensity_of(0.0, &c), 0.0);
        // Monotone non-decreasing.
        let mut prev = 0.0;
        for i in 0..100 {
            let v = intensity_of(i as f64 * 100.0, &c);
            assert!(v >= prev);
            prev = v;
        }
    }
}
