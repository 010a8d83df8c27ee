//! Strike events out: scene-based mapping to OSC trigger messages,
//! OSC 1.0 binary encoding, fire-and-forget UDP delivery, and a JSONL
//! event sink so offline runs and tests need no sockets.
//!
//! Network emission runs on its own thread behind a bounded drop-oldest
//! queue: the detection loop never blocks on the network, and a counter
//! records how many stale payloads were discarded under back-pressure.

use crate::strike::StrikeEvent;
use crate::types::Side;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::net::{ToSocketAddrs, UdpSocket};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::JoinHandle;
use thiserror::Error;

// ---------------------------------------------------------------------------
// OSC messages
// ---------------------------------------------------------------------------

/// One OSC argument. Only the types the trigger protocol needs.
#[derive(Debug, Clone, PartialEq)]
pub enum OscArg {
    Int(i32),
    Float(f32),
    Str(String),
}

/// An OSC 1.0 message: address pattern plus typed arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct OscMessage {
    pub address: String,
    pub args: Vec<OscArg>,
}

#[derive(Debug, Error, PartialEq)]
pub enum OscError {
    #[error("invalid address {0:?}: must begin with '/'")]
    InvalidAddress(String),
    #[error("string contains an embedded NUL byte")]
    EmbeddedNul,
}

/// Encode per OSC 1.0: NUL-terminated zero-padded address, a `,`-prefixed
/// type tag string padded the same way, then big-endian 4-byte payloads
/// (strings padded like addresses). The result length is always a
/// multiple of 4.
pub fn encode_osc(msg: &OscMessage) -> Result<Vec<u8>, OscError> {
    if !msg.address.starts_with('/') {
        return Err(OscError::InvalidAddress(msg.address.clone()));
    }
    let mut out = Vec::with_capacity(msg.address.len() + 8 + msg.args.len() * 4);
    push_osc_string(&mut out, &msg.address)?;

    let mut tags = String::with_capacity(msg.args.len() + 1);
    tags.push(',');
    for arg in &msg.args {
        tags.push(match arg {
            OscArg::Int(_) => 'i',
            OscArg::Float(_) => 'f',
            OscArg::Str(_) => 's',
        });
    }
    push_osc_string(&mut out, &tags)?;

    for arg in &msg.args {
        match arg {
            OscArg::Int(v) => out.extend_from_slice(&v.to_be_bytes()),
            OscArg::Float(v) => out.extend_from_slice(&v.to_be_bytes()),
            OscArg::Str(s) => push_osc_string(&mut out, s)?,
        }
    }
    debug_assert_eq!(out.len() % 4, 0);
    Ok(out)
}

/// Append `s`, a NUL terminator, and zero padding to the next 4-byte boundary.
fn push_osc_string(out: &mut Vec<u8>, s: &str) -> Result<(), OscError> {
    if s.as_bytes().contains(&0) {
        return Err(OscError::EmbeddedNul);
    }
    out.extend_from_slice(s.as_bytes());
    out.push(0);
    while !out.len().is_multiple_of(4) {
        out.push(0);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Scenes
// ---------------------------------------------------------------------------

/// Which sides a rule listens to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SideFilter {
    #[default]
    Any,
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
}

impl SideFilter {
    fn matches(self, side: Side) -> bool {
        match self {
            SideFilter::Any => true,
            SideFilter::Left => side == Side::Left,
            SideFilter::Right => side == Side::Right,
        }
    }
}

/// Event fields a rule may splice into its outgoing arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArgTemplate {
    /// int32, 0 = left / 1 = right.
    Side,
    /// float32 in [0, 1].
    Intensity,
    /// float32 seconds since stream start.
    T,
    /// float32 pixels.
    X,
    /// float32 pixels.
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RuleMatch {
    #[serde(default)]
    pub side: SideFilter,
    #[serde(default)]
    pub min_intensity: f64,
}

/// One event-to-message mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRule {
    #[serde(rename = "match", default)]
    pub matcher: RuleMatch,
    pub address: String,
    #[serde(default)]
    pub args: Vec<ArgTemplate>,
}

/// A named set of trigger rules — one of the performance's set pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub name: String,
    pub rules: Vec<SceneRule>,
    #[serde(default)]
    pub spine_output: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum SceneError {
    #[error("unknown scene {0:?}")]
    UnknownScene(String),
    #[error("invalid scene config: {0}")]
    Invalid(String),
}

impl SceneConfig {
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.name.is_empty() {
            return Err(SceneError::Invalid("scene name is empty".into()));
        }
        for rule in &self.rules {
            if !rule.address.starts_with('/') {
                return Err(SceneError::Invalid(format!(
                    "scene {:?}: rule address {:?} must begin with '/'",
                    self.name, rule.address
                )));
            }
            if rule.address.as_bytes().contains(&0) {
                return Err(SceneError::Invalid(format!(
                    "scene {:?}: rule address contains NUL",
                    self.name
                )));
            }
            if !(0.0..=1.0).contains(&rule.matcher.min_intensity) {
                return Err(SceneError::Invalid(format!(
                    "scene {:?}: min_intensity {} outside [0, 1]",
                    self.name, rule.matcher.min_intensity
                )));
            }
        }
        Ok(())
    }
}

/// Instantiate the active scene's matching rules for one event, in rule
/// order. Pure and stateless.
pub fn map_event(event: &StrikeEvent, scene: &SceneConfig) -> Vec<OscMessage> {
    scene
        .rules
        .iter()
        .filter(|rule| {
            rule.matcher.side.matches(event.side) && event.intensity >= rule.matcher.min_intensity
        })
        .map(|rule| OscMessage {
            address: rule.address.clone(),
            args: rule
                .args
                .iter()
                .map(|template| match template {
                    ArgTemplate::Side => OscArg::Int(event.side.as_index()),
                    ArgTemplate::Intensity => OscArg::Float(event.intensity as f32),
                    ArgTemplate::T => OscArg::Float(event.t as f32 / 1e6),
                    ArgTemplate::X => OscArg::Float(event.x as f32),
                    ArgTemplate::Y => OscArg::Float(event.y as f32),
                })
                .collect(),
        })
        .collect()
}

/// Holds the loaded scene set and the single active scene.
#[derive(Debug, Clone)]
pub struct SceneRouter {
    scenes: Vec<SceneConfig>,
    active: usize,
}

impl SceneRouter {
    /// Validates every scene; names must be unique and the set non-empty.
    /// The first scene starts active.
    pub fn new(scenes: Vec<SceneConfig>) -> Result<SceneRouter, SceneError> {
        if scenes.is_empty() {
            return Err(SceneError::Invalid("no scenes defined".into()));
        }
        for scene in &scenes {
            scene.validate()?;
        }
        for (i, a) in scenes.iter().enumerate() {
            if scenes[..i].iter().any(|b| b.name == a.name) {
                return Err(SceneError::Invalid(format!(
                    "duplicate scene name {:?}",
                    a.name
                )));
            }
        }
        Ok(SceneRouter { scenes, active: 0 })
    }

    pub fn active(&self) -> &SceneConfig {
        &self.scenes[self.active]
    }

    pub fn scene_names(&self) -> impl Iterator<Item = &str> {
        self.scenes.iter().map(|s| s.name.as_str())
    }

    /// Switch the active scene by name. Unknown names leave the active
    /// scene unchanged; switching to the current scene is a no-op.
    pub fn switch_scene(&mut self, name: &str) -> Result<&SceneConfig, SceneError> {
        match self.scenes.iter().position(|s| s.name == name) {
            Some(i) => {
                self.active = i;
                Ok(&self.scenes[i])
            }
            None => Err(SceneError::UnknownScene(name.to_string())),
        }
    }
}

/// The built-in scene used when no scene file is supplied: every strike
/// maps to `/sos/strike` with side, intensity and position, and spine
/// output is enabled.
pub fn default_scene() -> SceneConfig {
    SceneConfig {
        name: "default".into(),
        rules: vec![SceneRule {
            matcher: RuleMatch {
                side: SideFilter::Any,
                min_intensity: 0.0,
            },
            address: "/sos/strike".into(),
            args: vec![
                ArgTemplate::Side,
                ArgTemplate::Intensity,
                ArgTemplate::X,
                ArgTemplate::Y,
            ],
        }],
        spine_output: true,
    }
}

// ---------------------------------------------------------------------------
// UDP delivery
// ---------------------------------------------------------------------------

/// Largest payload we will put in one datagram (common-MTU safe).
pub const MAX_DATAGRAM: usize = 1472;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("payload of {0} bytes exceeds the {MAX_DATAGRAM}-byte datagram limit")]
    OversizedPayload(usize),
    #[error("socket failure: {0}")]
    Socket(#[from] std::io::Error),
}

/// Fire-and-forget UDP sender bound to an ephemeral local port.
pub struct OscSender {
    socket: UdpSocket,
    dest: std::net::SocketAddr,
}

impl OscSender {
    pub fn new(dest: &str) -> Result<OscSender, NetError> {
        let dest = dest.to_socket_addrs()?.next().ok_or_else(|| {
            NetError::Socket(std::io::Error::other(format!(
                "destination {dest:?} resolved to no address"
            )))
        })?;
        let bind_addr = if dest.is_ipv4() {
            "0.0.0.0:0"
        } else {
            "[::]:0"
        };
        let socket = UdpSocket::bind(bind_addr)?;
        Ok(OscSender { socket, dest })
    }

    /// Send one datagram. No delivery guarantee — live-performance semantics.
    pub fn send(&self, payload: &[u8]) -> Result<(), NetError> {
        if payload.len() > MAX_DATAGRAM {
            return Err(NetError::OversizedPayload(payload.len()));
        }
        self.socket.send_to(payload, self.dest)?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Bounded drop-oldest emitter
// ---------------------------------------------------------------------------

struct QueueState {
    buf: VecDeque<Vec<u8>>,
    closed: bool,
}

struct QueueShared {
    state: Mutex<QueueState>,
    ready: Condvar,
    capacity: usize,
    dropped: AtomicU64,
}

/// Non-blocking producer handle for the emitter queue. When the queue is
/// full the oldest payload is discarded and counted; `push` never waits.
#[derive(Clone)]
pub struct EmitterHandle {
    shared: Arc<QueueShared>,
}

impl EmitterHandle {
    pub fn push(&self, payload: Vec<u8>) {
        let mut state = self.shared.state.lock().unwrap();
        if state.closed {
            return;
        }
        while state.buf.len() >= self.shared.capacity {
            state.buf.pop_front();
            self.shared.dropped.fetch_add(1, Ordering::Relaxed);
        }
        state.buf.push_back(payload);
        drop(state);
        self.shared.ready.notify_one();
    }

    /// Payloads discarded because the queue was full.
    pub fn dropped(&self) -> u64 {
        self.shared.dropped.load(Ordering::Relaxed)
    }
}

/// Emitter worker: drains the queue and sends each payload to every
/// destination. Socket errors are counted, not fatal — the show goes on.
pub struct Emitter {
    handle: EmitterHandle,
    worker: Option<JoinHandle<u64>>,
}

impl Emitter {
    /// Spawn the network thread. `capacity` must be at least 1.
    pub fn spawn(senders: Vec<OscSender>, capacity: usize) -> Emitter {
        assert!(capacity >= 1);
        let shared = Arc::new(QueueShared {
            state: Mutex::new(QueueState {
                buf: VecDeque::new(),
                closed: false,
            }),
            ready: Condvar::new(),
            capacity,
            dropped: AtomicU64::new(0),
        });
        let handle = EmitterHandle {
            shared: shared.clone(),
        };
        let worker = std::thread::spawn(move || {
            let mut send_errors = 0u64;
            loop {
                let payload = {
                    let mut state = shared.state.lock().unwrap();
                    loop {
                        if let Some(p) = state.buf.pop_front() {
                            break Some(p);
                        }
                        if state.closed {
                            break None;
                        }
                        state = shared.ready.wait(state).unwrap();
                    }
                };
                match payload {
                    Some(p) => {
                        for sender in &senders {
                            if sender.send(&p).is_err() {
                                send_errors += 1;
                            }
                        }
                    }
                    None => return send_errors,
                }
            }
        });
        Emitter {
            handle,
            worker: Some(worker),
        }
    }

    pub fn handle(&self) -> EmitterHandle {
        self.handle.clone()
    }

    /// Close the queue, drain outstanding payloads, and return
    /// (dropped, send_errors).
    pub fn shutdown(mut self) -> (u64, u64) {
        {
            let mut state = self.handle.shared.state.lock().unwrap();
            state.closed = true;
        }
        self.handle.shared.ready.notify_all();
        let send_errors = self
            .worker
            .take()
            .map(|w| w.join().unwrap_or(0))
            .unwrap_or(0);
        (self.handle.dropped(), send_errors)
    }
}

// ---------------------------------------------------------------------------
// JSONL event sink
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct EventRecord {
    t: u64,
    side: Side,
    x: f64,
    y: f64,
    peak_acc: f64,
    intensity: f64,
}

/// One JSONL line per event:
/// `{"t":..,"side":"L","x":..,"y":..,"peak_acc":..,"intensity":..}`.
pub fn event_record_json(event: &StrikeEvent) -> String {
    let record = EventRecord {
        t: event.t,
        side: event.side,
        x: event.x,
        y: event.y,
        peak_acc: event.peak_acc,
        intensity: event.intensity,
    };
    serde_json::to_string(&record).expect("event record serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn event(side: Side, intensity: f64) -> StrikeEvent {
        StrikeEvent {
            side,
            t: 1_500_000,
            x: 120.0,
            y: 170.0,
            peak_acc: 50_000.0,
            intensity,
        }
    }

    // --- OSC encoding ---

    #[test]
    fn encode_empty_args_golden() {
        let msg = OscMessage {
            address: "/s".into(),
            args: vec![],
        };
        assert_eq!(
            encode_osc(&msg).unwrap(),
            vec![0x2F, 0x73, 0x00, 0x00, 0x2C, 0x00, 0x00, 0x00]
        );
    }

    #[test]
    fn encode_int_arg_golden() {
        let msg = OscMessage {
            address: "/strike".into(),
            args: vec![OscArg::Int(1)],
        };
        assert_eq!(
            encode_osc(&msg).unwrap(),
            vec![
                0x2F, 0x73, 0x74, 0x72, 0x69, 0x6B, 0x65, 0x00, // "/strike\0"
                0x2C, 0x69, 0x00, 0x00, // ",i\0\0"
                0x00, 0x00, 0x00, 0x01, // int32 1
            ]
        );
    }

    #[test]
    fn encode_rejects_bad_address_and_nul() {
        let msg = OscMessage {
            address: "x".into(),
            args: vec![],
        };
        assert_eq!(
            encode_osc(&msg).unwrap_err(),
            OscError::InvalidAddress("x".into())
        );
        let msg = OscMessage {
            address: "/ok".into(),
            args: vec![OscArg::Str("a\0b".into())],
        };
        assert_eq!(encode_osc(&msg).unwrap_err(), OscError::EmbeddedNul);
    }

    #[test]
    fn encoded_length_is_multiple_of_four() {
        for address in ["/a", "/ab", "/abc", "/abcd", "/abcde"] {
            for args in [
                vec![],
                vec![OscArg::Int(-7)],
                vec![OscArg::Float(0.25), OscArg::Str("xy".into())],
                vec![OscArg::Str("".into())],
            ] {
                let msg = OscMessage {
                    address: address.into(),
                    args,
                };
                assert_eq!(encode_osc(&msg).unwrap().len() % 4, 0);
            }
        }
    }

    #[test]
    fn float_args_encode_big_endian() {
        let msg = OscMessage {
            address: "/f".into(),
            args: vec![OscArg::Float(1.0)],
        };
        let bytes = encode_osc(&msg).unwrap();
        assert_eq!(&bytes[8..12], &[0x3F, 0x80, 0x00, 0x00]);
    }

    // --- scene mapping ---

    fn scene_with_rules(rules: Vec<SceneRule>) -> SceneConfig {
        SceneConfig {
            name: "test".into(),
            rules,
            spine_output: false,
        }
    }

    #[test]
    fn map_event_instantiates_templates() {
        let scene = scene_with_rules(vec![SceneRule {
            matcher: RuleMatch {
                side: SideFilter::Left,
                min_intensity: 0.5,
            },
            address: "/hit".into(),
            args: vec![ArgTemplate::Side, ArgTemplate::Intensity],
        }]);
        let msgs = map_event(&event(Side::Left, 0.8), &scene);
        assert_eq!(msgs.len(), 1);
        assert_eq!(msgs[0].address, "/hit");
        assert_eq!(msgs[0].args, vec![OscArg::Int(0), OscArg::Float(0.8)]);
    }

    #[test]
    fn map_event_filters_by_intensity_and_side() {
        let scene = scene_with_rules(vec![SceneRule {
            matcher: RuleMatch {
                side: SideFilter::Left,
                min_intensity: 0.9,
            },
            address: "/hit".into(),
            args: vec![],
        }]);
        assert!(map_event(&event(Side::Left, 0.8), &scene).is_empty());
        assert!(map_event(&event(Side::Right, 0.95), &scene).is_empty());
        assert_eq!(map_event(&event(Side::Left, 0.95), &scene).len(), 1);
    }

    #[test]
    fn map_event_preserves_rule_order() {
        let rule = |addr: &str, min: f64| SceneRule {
            matcher: RuleMatch {
                side: SideFilter::Any,
                min_intensity: min,
            },
            address: addr.into(),
            args: vec![],
        };
        let scene = scene_with_rules(vec![rule("/a", 0.0), rule("/b", 0.9), rule("/c", 0.1)]);
        let msgs = map_event(&event(Side::Right, 0.5), &scene);
        let addrs: Vec<&str> = msgs.iter().map(|m| m.address.as_str()).collect();
        assert_eq!(addrs, vec!["/a", "/c"]);
    }

    #[test]
    fn template_values_use_wire_types() {
        let scene = scene_with_rules(vec![SceneRule {
            matcher: RuleMatch::default(),
            address: "/all".into(),
            args: vec![
                ArgTemplate::Side,
                ArgTemplate::Intensity,
                ArgTemplate::T,
                ArgTemplate::X,
                ArgTemplate::Y,
            ],
        }]);
        let msgs = map_event(&event(Side::Right, 0.25), &scene);
        assert_eq!(
            msgs[0].args,
            vec![
                OscArg::Int(1),
                OscArg::Float(0.25),
                OscArg::Float(1.5),
                OscArg::Float(120.0),
                OscArg::Float(170.0),
            ]
        );
    }

    // --- scene switching ---

    fn simple_scene(name: &str) -> SceneConfig {
        SceneConfig {
            name: name.into(),
            rules: vec![],
            spine_output: false,
        }
    }

    #[test]
    fn switch_scene_by_name() {
        let mut router = SceneRouter::new(vec![simple_scene("a"), simple_scene("b")]).unwrap();
        assert_eq!(router.active().name, "a");
        router.switch_scene("b").unwrap();
        assert_eq!(router.active().name, "b");
    }

    #[test]
    fn unknown_scene_leaves_active_unchanged() {
        let mut router = SceneRouter::new(vec![simple_scene("a"), simple_scene("b")]).unwrap();
        let err = router.switch_scene("c").unwrap_err();
        assert_eq!(err, SceneError::UnknownScene("c".into()));
        assert_eq!(router.active().name, "a");
    }

    #[test]
    fn switch_to_current_scene_is_noop() {
        let mut router = SceneRouter::new(vec![simple_scene("a")]).unwrap();
        router.switch_scene("a").unwrap();
        assert_eq!(router.active().name, "a");
    }

    #[test]
    fn router_rejects_invalid_scene_sets() {
        assert!(SceneRouter::new(vec![]).is_err());
        assert!(SceneRouter::new(vec![simple_scene("a"), simple_scene("a")]).is_err());
        let bad_addr = SceneConfig {
            name: "x".into(),
            rules: vec![SceneRule {
                matcher: RuleMatch::default(),
                address: "no-slash".into(),
                args: vec![],
            }],
            spine_output: false,
        };
        assert!(SceneRouter::new(vec![bad_addr]).is_err());
    }

    #[test]
    fn scene_config_json_round_trip() {
        let scene = default_scene();
        let json = serde_json::to_string(&scene).unwrap();
        let back: SceneConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, scene);
    }

    // --- UDP ---

    #[test]
    fn loopback_echo_round_trip() {
        let listener = UdpSocket::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        listener
            .set_read_timeout(Some(std::time::Duration::from_secs(5)))
            .unwrap();

        let sender = OscSender::new(&addr.to_string()).unwrap();
        let payload = encode_osc(&OscMessage {
            address: "/sos/strike".into(),
            args: vec![OscArg::Int(0), OscArg::Float(0.5)],
        })
        .unwrap();
        sender.send(&payload).unwrap();

        let mut buf = [0u8; 2048];
        let (n, _) = listener.recv_from(&mut buf).unwrap();
        assert_eq!(&buf[..n], payload.as_slice());
    }

    #[test]
    fn oversized_payload_is_rejected() {
        let listener = UdpSocket::bind("127.0.0.1:0").unwrap();
        let sender = OscSender::new(&listener.local_addr().unwrap().to_string()).unwrap();
        let err = sender.send(&vec![0u8; 2000]).unwrap_err();
        assert!(matches!(err, NetError::OversizedPayload(2000)));
    }

    #[test]
    fn unresolvable_host_surfaces_socket_failure() {
        assert!(matches!(
            OscSender::new("definitely-not-a-real-host.invalid:9000"),
            Err(NetError::Socket(_))
        ));
    }

    // --- emitter queue ---

    #[test]
    fn queue_drops_oldest_when_full() {
        // A handle with no worker attached: the queue only fills, so the
        // drop-oldest policy is observable deterministically.
        let shared = Arc::new(QueueShared {
            state: Mutex::new(QueueState {
                buf: VecDeque::new(),
                closed: false,
            }),
            ready: Condvar::new(),
            capacity: 2,
            dropped: AtomicU64::new(0),
        });
        let handle = EmitterHandle { shared };
        for i in 0..5u8 {
            handle.push(vec![i]);
        }
        assert_eq!(handle.dropped(), 3);
        let state = handle.shared.state.lock().unwrap();
        assert_eq!(
            state.buf.iter().map(|p| p[0]).collect::<Vec<_>>(),
            vec![3, 4],
            "newest payloads survive, oldest are discarded"
        );
    }

    #[test]
    fn closed_queue_ignores_pushes() {
        let emitter = Emitter::spawn(vec![], 4);
        let handle = emitter.handle();
        let (dropped, errors) = emitter.shutdown();
        assert_eq!((dropped, errors), (0, 0));
        handle.push(vec![1]); // after shutdown: silently ignored
        assert_eq!(handle.dropped(), 0);
    }

    #[test]
    fn push_never_blocks_and_delivery_reaches_socket() {
        let listener = UdpSocket::bind("127.0.0.1:0").unwrap();
        listener
            .set_read_timeout(Some(std::time::Duration::from_secs(5)))
            .unwrap();
        let sender = OscSender::new(&listener.local_addr().unwrap().to_string()).unwrap();
        let emitter = Emitter::spawn(vec![sender], 256);
        let handle = emitter.handle();

        let start = std::time::Instant::now();
        for i in 0..50u8 {
            handle.push(vec![i; 4]);
        }
        // Pushing 50 payloads must not take anywhere near a network RTT each.
        assert!(start.elapsed() < std::time::Duration::from_secs(1));

        let mut received = 0;
        let mut buf = [0u8; 64];
        while received < 50 {
            let (n, _) = listener.recv_from(&mut buf).unwrap();
            assert_eq!(n, 4);
            received += 1;
        }
        let (dropped, errors) = emitter.shutdown();
        assert_eq!(dropped, 0);
        assert_eq!(errors, 0);
    }

    // --- JSONL ---

    #[test]
    fn event_record_shape() {
        let line = event_record_json(&event(Side::Left, 0.5));
        assert_eq!(
            line,
            r#"{"t":1500000,"side":"L","x":120.0,"y":170.0,"peak_acc":50000.0,"intensity":0.5}"#
        );
    }
}
