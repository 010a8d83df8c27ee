//! Contour spines: outward line segments anchored on the silhouette
//! boundary whose lengths follow local motion acceleration. Output is
//! renderer-agnostic vector geometry, one JSONL record per frame.
//!
//! The boundary is traced with Moore-neighbor following over the blob's
//! own pixels. Per-point acceleration comes from nearest-point
//! correspondence between consecutive contours: cheap, deterministic,
//! and good enough at frame rate.

use crate::silhouette::{BinaryMask, Blob};
use crate::types::{Side, Vec2};
use serde::Serialize;

/// Closed outer boundary of a blob. Consecutive points are 8-neighbors
/// and the last point is an 8-neighbor of the first. Winding is
/// counterclockwise in a y-up frame (clockwise on screen, where y grows
/// downward).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    pub points: Vec<(u32, u32)>,
}

impl Contour {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Mean of the contour points.
    pub fn centroid(&self) -> Vec2 {
        let n = self.points.len().max(1) as f64;
        let (sx, sy) = self.points.iter().fold((0.0, 0.0), |(sx, sy), &(x, y)| {
            (sx + x as f64, sy + y as f64)
        });
        Vec2::new(sx / n, sy / n)
    }
}

/// Moore neighborhood in clockwise screen order starting north.
const RING: [(i64, i64); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

/// Trace the outer boundary of `blob`, starting from its raster-first
/// pixel. Hole boundaries are not traced. Tracing follows the blob's own
/// pixels, so an unrelated blob touching it diagonally cannot divert the
/// walk.
pub fn trace_contour(blob: &Blob) -> Contour {
    let bbox = blob.bbox;
    let bw = (bbox.max_x - bbox.min_x + 1) as usize;
    let bh = (bbox.max_y - bbox.min_y + 1) as usize;

    // Local membership bitmap over the bounding box.
    let mut local = vec![false; bw * bh];
    for run in &blob.runs {
        let row = (run.y - bbox.min_y) as usize * bw;
        for x in run.x0..=run.x1 {
            local[row + (x - bbox.min_x) as usize] = true;
        }
    }
    let member = |x: i64, y: i64| -> bool {
        let lx = x - bbox.min_x as i64;
        let ly = y - bbox.min_y as i64;
        lx >= 0
            && ly >= 0
            && lx < bw as i64
            && ly < bh as i64
            && local[ly as usize * bw + lx as usize]
    };

    let (sx, sy) = blob.first_pixel();
    let start = (sx as i64, sy as i64);
    // The pixel west of the raster-first pixel is never a member.
    let backtrack_dir = 6usize; // index of W in RING

    // One scan step: walk the ring clockwise from just past the
    // backtrack; return the first member and its predecessor slot.
    let scan = |c: (i64, i64), bdir: usize| -> Option<((i64, i64), usize)> {
        for k in 1..=8 {
            let idx = (bdir + k) % 8;
            let cand = (c.0 + RING[idx].0, c.1 + RING[idx].1);
            if member(cand.0, cand.1) {
                return Some((cand, idx));
            }
        }
        None
    };

    let mut points = vec![(sx, sy)];
    let Some((first_step, _)) = scan(start, backtrack_dir) else {
        return Contour { points }; // isolated pixel
    };

    // Walk appending every visited pixel (revisits included: a spur is
    // traversed out and back). Stop upon standing on the start pixel
    // about to repeat the very first move.
    let mut current = start;
    let mut backtrack_cell = (
        start.0 + RING[backtrack_dir].0,
        start.1 + RING[backtrack_dir].1,
    );
    let max_steps = 8 * blob.area as usize + 8;
    for step in 0..max_steps {
        // Ring index of the backtrack cell around the current pixel.
        let bdir = RING
            .iter()
            .position(|&(dx, dy)| (current.0 + dx, current.1 + dy) == backtrack_cell)
            .expect("backtrack cell is adjacent to current pixel");
        let Some((next, next_dir)) = scan(current, bdir) else {
            break;
        };
        if current == start && next == first_step && step > 0 {
            break;
        }
        backtrack_cell = (
            current.0 + RING[(next_dir + 7) % 8].0,
            current.1 + RING[(next_dir + 7) % 8].1,
        );
        current = next;
        points.push((current.0 as u32, current.1 as u32));
    }
    // Arriving back on the start appends it once more; drop the duplicate.
    if points.len() > 1 && points.last() == points.first() {
        points.pop();
    }

    Contour { points }
}

/// Result of matching one contour against the previous frame's: per-point
/// speeds (fed back in as `prev_speeds` next frame) and acceleration
/// estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMotion {
    pub speeds: Vec<f64>,
    pub accels: Vec<f64>,
}

/// Estimate per-point acceleration between consecutive contours.
///
/// Each current point is matched to its nearest previous point. The
/// displacement is capped at `match_radius`; points with no previous
/// point within the radius get acceleration 0.
pub fn point_motion(
    prev: &Contour,
    curr: &Contour,
    prev_speeds: &[f64],
    dt_seconds: f64,
    match_radius: f64,
) -> PointMotion {
    assert!(dt_seconds > 0.0, "dt must be positive");
    assert_eq!(prev_speeds.len(), prev.points.len());

    let mut speeds = Vec::with_capacity(curr.points.len());
    let mut accels = Vec::with_capacity(curr.points.len());
    for &(cx, cy) in &curr.points {
        let cpos = Vec2::new(cx as f64, cy as f64);
        let mut best: Option<(f64, usize)> = None;
        for (i, &(px, py)) in prev.points.iter().enumerate() {
            let d = cpos.distance(Vec2::new(px as f64, py as f64));
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, i));
            }
        }
        match best {
            Some((d, i)) if d <= match_radius => {
                let speed = d / dt_seconds;
                speeds.push(speed);
                accels.push((speed - prev_speeds[i]).abs() / dt_seconds);
            }
            Some((_, _)) => {
                // Beyond the match radius: capped displacement, no accel.
                speeds.push(match_radius / dt_seconds);
                accels.push(0.0);
            }
            None => {
                speeds.push(0.0);
                accels.push(0.0);
            }
        }
    }
    PointMotion { speeds, accels }
}

/// One outward segment: origin on the contour, unit direction, length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spine {
    pub origin: Vec2,
    pub dir: Vec2,
    pub len: f64,
}

impl Spine {
    fn to_array(self) -> [f64; 5] {
        [
            self.origin.x,
            self.origin.y,
            self.dir.x,
            self.dir.y,
            self.len,
        ]
    }
}

/// All spines for one frame of one side.
#[derive(Debug, Clone, PartialEq)]
pub struct SpineField {
    pub frame_t: u64,
    pub spines: Vec<Spine>,
}

/// Spine construction parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpineConfig {
    /// Display pixels per (pixel/second^2) of local acceleration.
    pub gain: f64,
    /// Length clamp, pixels.
    pub max_len: f64,
    /// Emit a spine every `stride`-th contour point.
    pub stride: usize,
    /// Correspondence radius for [`point_motion`], pixels.
    pub match_radius: f64,
}

impl Default for SpineConfig {
    fn default() -> Self {
        SpineConfig {
            gain: 0.002,
            max_len: 40.0,
            stride: 4,
            match_radius: 12.0,
        }
    }
}

/// Spines shorter than this are dropped entirely.
const MIN_SPINE_LEN: f64 = 0.5;

/// Build the spine field for one contour. `mask` is the frame's
/// foreground mask, used to orient normals into the background.
pub fn compute_spines(
    contour: &Contour,
    accels: &[f64],
    mask: &BinaryMask,
    cfg: &SpineConfig,
    frame_t: u64,
) -> SpineField {
    assert!(cfg.gain >= 0.0, "gain must be non-negative");
    assert!(cfg.stride >= 1, "stride must be >= 1");
    assert_eq!(accels.len(), contour.points.len());

    let n = contour.points.len();
    let centroid = contour.centroid();
    let mut spines = Vec::new();
    for i in (0..n).step_by(cfg.stride) {
        let len = (cfg.gain * accels[i]).min(cfg.max_len);
        if len < MIN_SPINE_LEN {
            continue;
        }
        let origin = {
            let (x, y) = contour.points[i];
            Vec2::new(x as f64, y as f64)
        };
        let dir = outward_normal(contour, i, centroid, mask);
        spines.push(Spine { origin, dir, len });
    }
    SpineField { frame_t, spines }
}

/// Outward unit normal at contour point `i`: perpendicular of the central
/// difference tangent, sign chosen to point into background.
fn outward_normal(contour: &Contour, i: usize, centroid: Vec2, mask: &BinaryMask) -> Vec2 {
    let n = contour.points.len();
    let p = |j: usize| {
        let (x, y) = contour.points[j];
        Vec2::new(x as f64, y as f64)
    };
    let origin = p(i);
    let tangent = p((i + 1) % n) - p((i + n - 1) % n);

    let candidate = match tangent.perp().normalized() {
        Some(v) => v,
        // Degenerate tangent (tiny contours): point away from the centroid.
        None => match (origin - centroid).normalized() {
            Some(v) => return v,
            None => return Vec2::new(0.0, -1.0),
        },
    };

    let into_background = |dir: Vec2| {
        let probe = origin + dir * 1.5;
        !mask.get_clamped(probe.x.round() as i64, probe.y.round() as i64)
    };
    if into_background(candidate) {
        candidate
    } else if into_background(candidate * -1.0) {
        candidate * -1.0
    } else {
        // Both probes landed on foreground (deep crevice); fall back to
        // pointing away from the centroid.
        match (origin - centroid).normalized() {
            Some(v) => {
                if v.dot(candidate) >= 0.0 {
                    candidate
                } else {
                    candidate * -1.0
                }
            }
            None => candidate,
        }
    }
}

#[derive(Serialize)]
struct SpineRecord {
    t: u64,
    side: Side,
    spines: Vec<[f64; 5]>,
}

/// One JSONL record: `{"t":..,"side":"L","spines":[[ox,oy,dx,dy,len],..]}`.
pub fn spine_record_json(side: Side, field: &SpineField) -> String {
    let record = SpineRecord {
        t: field.frame_t,
        side,
        spines: field.spines.iter().map(|s| s.to_array()).collect(),
    };
    serde_json::to_string(&record).expect("spine record serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::silhouette::{connected_components, Connectivity};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn mask_from_str(rows: &[&str]) -> BinaryMask {
        let h = rows.len() as u32;
        let w = rows[0].len() as u32;
        let bits = rows
            .iter()
            .flat_map(|r| r.chars().map(|c| c == '#'))
            .collect();
        BinaryMask::new(w, h, bits)
    }

    fn single_blob(mask: &BinaryMask) -> Blob {
        let blobs = connected_components(mask, Connectivity::Eight);
        assert_eq!(blobs.len(), 1, "expected exactly one blob");
        blobs.into_iter().next().unwrap()
    }

    #[test]
    fn single_pixel_contour() {
        let m = mask_from_str(&["...", ".#.", "..."]);
        let c = trace_contour(&single_blob(&m));
        assert_eq!(c.points, vec![(1, 1)]);
    }

    #[test]
    fn solid_square_boundary_excludes_interior() {
        let m = mask_from_str(&["###", "###", "###"]);
        let c = trace_contour(&single_blob(&m));
        assert_eq!(c.len(), 8);
        assert!(!c.points.contains(&(1, 1)));
        assert_closed_8_connected(&c);
    }

    #[test]
    fn two_pixel_bar_terminates() {
        let m = mask_from_str(&["##"]);
        let c = trace_contour(&single_blob(&m));
        assert_eq!(c.points, vec![(0, 0), (1, 0)]);
        assert_closed_8_connected(&c);
    }

    #[test]
    fn plus_shape_skips_center() {
        let m = mask_from_str(&[".#.", "###", ".#."]);
        let c = trace_contour(&single_blob(&m));
        let set: BTreeSet<_> = c.points.iter().copied().collect();
        assert!(!set.contains(&(1, 1)));
        assert_eq!(set.len(), 4);
        assert_closed_8_connected(&c);
    }

    fn assert_closed_8_connected(c: &Contour) {
        for pair in c.points.windows(2) {
            let dx = (pair[0].0 as i64 - pair[1].0 as i64).abs();
            let dy = (pair[0].1 as i64 - pair[1].1 as i64).abs();
            assert!(dx <= 1 && dy <= 1 && (dx, dy) != (0, 0), "{pair:?}");
        }
        if c.len() > 1 {
            let (a, b) = (c.points[0], *c.points.last().unwrap());
            let dx = (a.0 as i64 - b.0 as i64).abs();
            let dy = (a.1 as i64 - b.1 as i64).abs();
            assert!(dx <= 1 && dy <= 1, "contour not closed: {a:?} vs {b:?}");
        }
    }

    /// Foreground pixels with at least one 4-connected background neighbor.
    fn boundary_oracle(mask: &BinaryMask) -> BTreeSet<(u32, u32)> {
        let mut set = BTreeSet::new();
        for y in 0..mask.height() as i64 {
            for x in 0..mask.width() as i64 {
                if !mask.get_clamped(x, y) {
                    continue;
                }
                let edge = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)]
                    .iter()
                    .any(|(dx, dy)| !mask.get_clamped(x + dx, y + dy));
                if edge {
                    set.insert((x as u32, y as u32));
                }
            }
        }
        set
    }

    /// Fill background pockets not 4-connected to the border, so every
    /// remaining blob is hole-free and the boundary oracle applies.
    fn fill_holes(mask: &BinaryMask) -> BinaryMask {
        let (w, h) = (mask.width() as i64, mask.height() as i64);
        let mut outside = vec![false; (w * h) as usize];
        let mut stack = Vec::new();
        for x in 0..w {
            for y in [0, h - 1] {
                if !mask.get_clamped(x, y) {
                    stack.push((x, y));
                }
            }
        }
        for y in 0..h {
            for x in [0, w - 1] {
                if !mask.get_clamped(x, y) {
                    stack.push((x, y));
                }
            }
        }
        while let Some((x, y)) = stack.pop() {
            if x < 0 || y < 0 || x >= w || y >= h {
                continue;
            }
            let idx = (y * w + x) as usize;
            if outside[idx] || mask.get_clamped(x, y) {
                continue;
            }
            outside[idx] = true;
            stack.extend([(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)]);
        }
        let bits = (0..(w * h) as usize)
            .map(|i| mask.bits()[i] || !outside[i])
            .collect();
        BinaryMask::new(mask.width(), mask.height(), bits)
    }

    fn random_mask(seed: u64, w: u32, h: u32) -> BinaryMask {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        let bits = (0..w * h)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (state >> 60) < 8 // 50%
            })
            .collect();
        BinaryMask::new(w, h, bits)
    }

    proptest! {
        #[test]
        fn traced_set_equals_boundary_scan(seed in 0u64..500) {
            let filled = fill_holes(&random_mask(seed, 16, 16));
            for blob in connected_components(&filled, Connectivity::Eight) {
                let contour = trace_contour(&blob);
                assert_closed_8_connected(&contour);
                let traced: BTreeSet<_> = contour.points.iter().copied().collect();

                // Oracle restricted to this blob's pixels.
                let mut blob_mask = BinaryMask::empty(filled.width(), filled.height());
                for run in &blob.runs {
                    for x in run.x0..=run.x1 {
                        blob_mask.set(x, run.y, true);
                    }
                }
                let expected = boundary_oracle(&blob_mask);
                prop_assert_eq!(traced, expected, "seed {}", seed);
            }
        }
    }

    // --- point_motion ---

    fn square_contour(x0: u32, y0: u32, size: u32) -> Contour {
        let mut m = BinaryMask::empty(x0 + size + 4, y0 + size + 4);
        for y in y0..y0 + size {
            for x in x0..x0 + size {
                m.set(x, y, true);
            }
        }
        trace_contour(&single_blob(&m))
    }

    #[test]
    fn identical_contours_have_zero_accel() {
        let c = square_contour(2, 2, 5);
        let zeros = vec![0.0; c.len()];
        let m = point_motion(&c, &c, &zeros, 1.0 / 60.0, 12.0);
        assert!(m.accels.iter().all(|&a| a == 0.0));
        assert!(m.speeds.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn constant_translation_gives_vanishing_accel() {
        // Three frames translated by 2 px/frame: after the speeds warm up
        // on the first pair, the second pair sees constant per-point
        // normal displacement. Nearest-point matching is only ambiguous
        // where edge families meet (corners), so the bulk of the contour
        // must report vanishing acceleration.
        let c0 = square_contour(2, 4, 12);
        let c1 = square_contour(4, 4, 12);
        let c2 = square_contour(6, 4, 12);
        let dt = 1.0 / 60.0;
        let m1 = point_motion(&c0, &c1, &vec![0.0; c0.len()], dt, 12.0);
        let m2 = point_motion(&c1, &c2, &m1.speeds, dt, 12.0);
        let peak = 2.0 * 60.0 * 60.0; // accel scale of one full jump
        let mut sorted = m2.accels.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        assert_eq!(median, 0.0, "median accel must vanish");
        let quiet = m2.accels.iter().filter(|&&a| a <= 0.05 * peak).count();
        assert!(
            quiet * 4 >= m2.accels.len() * 3,
            "only {quiet} of {} points quiet",
            m2.accels.len()
        );
    }

    #[test]
    fn sudden_jump_registers_d_f_squared() {
        let fps = 60.0;
        let d = 3.0;
        let c_still = square_contour(10, 10, 6);
        let c_moved = square_contour(13, 10, 6);
        let dt = 1.0 / fps;
        // Two stationary frames: speeds all zero.
        let warm = point_motion(&c_still, &c_still, &vec![0.0; c_still.len()], dt, 12.0);
        // Frame 3 jumps by d.
        let m = point_motion(&c_still, &c_moved, &warm.speeds, dt, 12.0);
        let expected = d * fps * fps;
        // Points on the leading/trailing vertical edges move the full d;
        // top/bottom edge points may match nearer points. Check the max.
        let max = m.accels.iter().cloned().fold(0.0, f64::max);
        assert!(
            (max - expected).abs() / expected < 0.05,
            "max accel {max}, expected about {expected}"
        );
    }

    #[test]
    fn beyond_match_radius_gets_zero_accel() {
        let c0 = square_contour(2, 2, 4);
        let c1 = square_contour(30, 2, 4);
        let m = point_motion(&c0, &c1, &vec![0.0; c0.len()], 1.0 / 60.0, 5.0);
        assert!(m.accels.iter().all(|&a| a == 0.0));
    }

    // --- compute_spines ---

    fn full_mask_of(c: &Contour, w: u32, h: u32) -> BinaryMask {
        // Rebuild a mask that contains the square the contour traces
        // (fill by scanline between min and max x per row).
        let mut m = BinaryMask::empty(w, h);
        use std::collections::BTreeMap;
        let mut rows: BTreeMap<u32, (u32, u32)> = BTreeMap::new();
        for &(x, y) in &c.points {
            let e = rows.entry(y).or_insert((x, x));
            e.0 = e.0.min(x);
            e.1 = e.1.max(x);
        }
        for (y, (x0, x1)) in rows {
            for x in x0..=x1 {
                m.set(x, y, true);
            }
        }
        m
    }

    #[test]
    fn zero_accels_emit_no_spines() {
        let c = square_contour(2, 2, 6);
        let mask = full_mask_of(&c, 20, 20);
        let field = compute_spines(
            &c,
            &vec![0.0; c.len()],
            &mask,
            &SpineConfig {
                stride: 1,
                ..SpineConfig::default()
            },
            0,
        );
        assert!(field.spines.is_empty());
    }

    #[test]
    fn spine_length_is_gain_times_accel() {
        let c = square_contour(2, 2, 6);
        let mask = full_mask_of(&c, 20, 20);
        let mut accels = vec![0.0; c.len()];
        accels[0] = 900.0;
        let cfg = SpineConfig {
            gain: 0.01,
            max_len: 40.0,
            stride: 1,
            match_radius: 12.0,
        };
        let field = compute_spines(&c, &accels, &mask, &cfg, 7);
        assert_eq!(field.frame_t, 7);
        assert_eq!(field.spines.len(), 1);
        assert!((field.spines[0].len - 9.0).abs() < 1e-12);
    }

    #[test]
    fn square_normals_point_outward() {
        for (x0, y0) in [(2u32, 2u32), (5, 8), (12, 3)] {
            let c = square_contour(x0, y0, 7);
            let mask = full_mask_of(&c, 30, 30);
            let center = Vec2::new(x0 as f64 + 3.0, y0 as f64 + 3.0);
            let cfg = SpineConfig {
                gain: 1.0,
                max_len: 10.0,
                stride: 1,
                match_radius: 12.0,
            };
            let field = compute_spines(&c, &vec![5.0; c.len()], &mask, &cfg, 0);
            assert_eq!(field.spines.len(), c.len());
            for s in &field.spines {
                assert!((s.dir.norm() - 1.0).abs() < 1e-6, "normal not unit");
                let outward_ray = s.origin - center;
                assert!(
                    s.dir.dot(outward_ray) > 0.0,
                    "normal {:?} at {:?} does not point away from interior",
                    s.dir,
                    s.origin
                );
                // Probing 2px along the normal must leave the square.
                let probe = s.origin + s.dir * 2.0;
                assert!(!mask.get_clamped(probe.x.round() as i64, probe.y.round() as i64));
            }
        }
    }

    #[test]
    fn lengths_clamp_at_max_len() {
        let c = square_contour(2, 2, 6);
        let mask = full_mask_of(&c, 20, 20);
        let cfg = SpineConfig {
            gain: 1e9,
            max_len: 13.5,
            stride: 1,
            match_radius: 12.0,
        };
        let field = compute_spines(&c, &vec![1.0; c.len()], &mask, &cfg, 0);
        assert!(!field.spines.is_empty());
        assert!(field.spines.iter().all(|s| s.len == 13.5));
    }

    #[test]
    fn stride_subsamples_points() {
        let c = square_contour(2, 2, 8);
        let mask = full_mask_of(&c, 20, 20);
        let cfg = SpineConfig {
            gain: 1.0,
            max_len: 50.0,
            stride: 4,
            match_radius: 12.0,
        };
        let field = compute_spines(&c, &vec![10.0; c.len()], &mask, &cfg, 0);
        assert_eq!(field.spines.len(), c.len().div_ceil(4));
    }

    #[test]
    fn translation_equivariance_of_spines() {
        // Translating both frames translates spine origins and preserves
        // directions and lengths.
        let (dx, dy) = (9u32, 5u32);
        let dt = 1.0 / 60.0;
        let run = |ox: u32, oy: u32| {
            let c0 = square_contour(ox, oy, 7);
            let c1 = square_contour(ox + 2, oy, 7);
            let m = point_motion(&c0, &c1, &vec![0.0; c0.len()], dt, 12.0);
            let mask = full_mask_of(&c1, 40, 40);
            let cfg = SpineConfig {
                gain: 0.01,
                max_len: 30.0,
                stride: 1,
                match_radius: 12.0,
            };
            compute_spines(&c1, &m.accels, &mask, &cfg, 0)
        };
        let base = run(3, 4);
        let moved = run(3 + dx, 4 + dy);
        assert_eq!(base.spines.len(), moved.spines.len());
        for (a, b) in base.spines.iter().zip(&moved.spines) {
            assert!((b.origin.x - a.origin.x - dx as f64).abs() < 1e-9);
            assert!((b.origin.y - a.origin.y - dy as f64).abs() < 1e-9);
            assert!((b.dir - a.dir).norm() < 1e-9);
            assert!((b.len - a.len).abs() < 1e-9);
        }
    }

    #[test]
    fn larger_accels_never_shrink_spines() {
        let c = square_contour(2, 2, 6);
        let mask = full_mask_of(&c, 20, 20);
        let cfg = SpineConfig {
            gain: 0.01,
            max_len: 15.0,
            stride: 1,
            match_radius: 12.0,
        };
        let low = compute_spines(&c, &vec![500.0; c.len()], &mask, &cfg, 0);
        let high = compute_spines(&c, &vec![800.0; c.len()], &mask, &cfg, 0);
        for (l, h) in low.spines.iter().zip(&high.spines) {
            assert!(h.len >= l.len);
        }
    }

    #[test]
    fn single_point_contour_uses_fallback_normal() {
        let m = mask_from_str(&["...", ".#.", "..."]);
        let blob = single_blob(&m);
        let c = trace_contour(&blob);
        let cfg = SpineConfig {
            gain: 1.0,
            max_len: 10.0,
            stride: 1,
            match_radius: 12.0,
        };
        let field = compute_spines(&c, &[4.0], &m, &cfg, 0);
        assert_eq!(field.spines.len(), 1);
        assert!((field.spines[0].dir.norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn jsonl_record_shape() {
        let field = SpineField {
            frame_t: 16_667,
            spines: vec![Spine {
                origin: Vec2::new(3.0, 4.0),
                dir: Vec2::new(0.0, -1.0),
                len: 2.5,
            }],
        };
        let line = spine_record_json(Side::Left, &field);
        assert_eq!(
            line,
            r#"{"t":16667,"side":"L","spines":[[3.0,4.0,0.0,-1.0,2.5]]}"#
        );
    }
}
