//! Silhouette extraction: fixed-threshold segmentation into a binary
//! mask, optional morphological cleanup, and run-based connected
//! component labeling into blobs.
//!
//! The backlit rig produces a bimodal image (lit screen vs. occluding
//! performer), so a static threshold with a strict inequality is both
//! faithful and deterministic. All operations here are pure functions
//! of their inputs.

use crate::frame_io::Frame;
use serde::{Deserialize, Serialize};

/// Which intensity range counts as foreground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    /// Foreground iff luma < threshold (occluded backlight).
    DarkForeground,
    /// Foreground iff luma > threshold.
    BrightForeground,
}

/// Row-major foreground flags with the source frame's dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> BinaryMask {
        assert_eq!(bits.len(), width as usize * height as usize);
        BinaryMask {
            width,
            height,
            bits,
        }
    }

    pub fn empty(width: u32, height: u32) -> BinaryMask {
        BinaryMask::new(width, height, vec![false; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    /// False for coordinates outside the image.
    pub fn get_clamped(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            false
        } else {
            self.get(x as u32, y as u32)
        }
    }

    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn foreground_count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// Threshold a frame into a foreground mask. The comparison is strict,
/// so a pixel exactly at the threshold is background under both polarities.
pub fn segment(frame: &Frame, threshold: u8, polarity: Polarity) -> BinaryMask {
    let bits = frame
        .luma()
        .iter()
        .map(|&l| match polarity {
            Polarity::DarkForeground => l < threshold,
            Polarity::BrightForeground => l > threshold,
        })
        .collect();
    BinaryMask::new(frame.width(), frame.height(), bits)
}

/// Morphological opening (3x3 cross erosion then dilation), repeated
/// `open_iterations` times. Zero iterations is the identity. Pixels
/// outside the image are treated as background.
pub fn denoise(mask: &BinaryMask, open_iterations: u32) -> BinaryMask {
    let mut current = mask.clone();
    for _ in 0..open_iterations {
        current = dilate_cross(&erode_cross(&current));
    }
    current
}

const CROSS: [(i64, i64); 5] = [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)];

fn erode_cross(mask: &BinaryMask) -> BinaryMask {
    let mut out = BinaryMask::empty(mask.width, mask.height);
    for y in 0..mask.height as i64 {
        for x in 0..mask.width as i64 {
            let keep = CROSS
                .iter()
                .all(|(dx, dy)| mask.get_clamped(x + dx, y + dy));
            if keep {
                out.set(x as u32, y as u32, true);
            }
        }
    }
    out
}

fn dilate_cross(mask: &BinaryMask) -> BinaryMask {
    let mut out = BinaryMask::empty(mask.width, mask.height);
    for y in 0..mask.height as i64 {
        for x in 0..mask.width as i64 {
            let hit = CROSS
                .iter()
                .any(|(dx, dy)| mask.get_clamped(x + dx, y + dy));
            if hit {
                out.set(x as u32, y as u32, true);
            }
        }
    }
    out
}

/// Pixel connectivity for component labeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    #[serde(rename = "4")]
    Four,
    #[serde(rename = "8")]
    Eight,
}

/// One horizontal run of foreground pixels: row `y`, columns `x0..=x1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub y: u32,
    pub x0: u32,
    pub x1: u32,
}

// A run is never empty by construction, so there is no is_empty.
#[allow(clippy::len_without_is_empty)]
impl Run {
    /// Number of pixels in the run (always >= 1).
    pub fn len(&self) -> u32 {
        self.x1 - self.x0 + 1
    }
}

/// Inclusive pixel bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BBox {
    pub min_x: u32,
    pub min_y: u32,
    pub max_x: u32,
    pub max_y: u32,
}

/// A maximal connected set of foreground pixels, stored as per-row runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    /// Positive label, assigned in raster order of each blob's first pixel.
    pub label: u32,
    pub area: u32,
    pub bbox: BBox,
    /// Mean of member pixel coordinates.
    pub centroid: (f64, f64),
    /// Member runs sorted by (y, x0).
    pub runs: Vec<Run>,
}

impl Blob {
    /// First member pixel in raster order.
    pub fn first_pixel(&self) -> (u32, u32) {
        let r = &self.runs[0];
        (r.x0, r.y)
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        // Runs are sorted by (y, x0); binary search the row start.
        let row_start = self.runs.partition_point(|r| r.y < y);
        self.runs[row_start..]
            .iter()
            .take_while(|r| r.y == y)
            .any(|r| r.x0 <= x && x <= r.x1)
    }
}

/// Partition foreground pixels into maximal connected blobs.
///
/// Labels are assigned in raster order of each blob's first pixel and the
/// returned list is sorted by label ascending.
pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> Vec<Blob> {
    // Extract runs row by row, unioning each run with compatible runs of
    // the previous row. Under 8-connectivity the overlap window widens by
    // one pixel on each end.
    let mut parents: Vec<u32> = Vec::new(); // union-find over run ids
    let mut runs: Vec<Run> = Vec::new();
    let mut prev_row: Vec<u32> = Vec::new(); // run ids in the previous row

    for y in 0..mask.height {
        let mut cur_row: Vec<u32> = Vec::new();
        let mut x = 0u32;
        while x < mask.width {
            if !mask.get(x, y) {
                x += 1;
                continue;
            }
            let x0 = x;
            while x < mask.width && mask.get(x, y) {
                x += 1;
            }
            let run = Run { y, x0, x1: x - 1 };
            let id = runs.len() as u32;
            runs.push(run);
            parents.push(id);

            let (lo, hi) = match connectivity {
                Connectivity::Four => (run.x0 as i64, run.x1 as i64),
                Connectivity::Eight => (run.x0 as i64 - 1, run.x1 as i64 + 1),
            };
            for &pid in &prev_row {
                let p = runs[pid as usize];
                if (p.x0 as i64) <= hi && (p.x1 as i64) >= lo {
                    union(&mut parents, id, pid);
                }
            }
            cur_row.push(id);
        }
        prev_row = cur_row;
    }

    // Group runs by root, find each component's raster-first pixel.
    let mut groups: std::collections::HashMap<u32, Vec<u32>> = std::collections::HashMap::new();
    for id in 0..runs.len() as u32 {
        groups.entry(find(&mut parents, id)).or_default().push(id);
    }
    let mut components: Vec<Vec<u32>> = groups.into_values().collect();
    // Run ids increase in raster order, so the smallest id in a group
    // holds the component's first pixel.
    for ids in &mut components {
        ids.sort_unstable();
    }
    components.sort_unstable_by_key(|ids| ids[0]);

    components
        .into_iter()
        .enumerate()
        .map(|(i, ids)| {
            let member_runs: Vec<Run> = ids.iter().map(|&id| runs[id as usize]).collect();
            build_blob(i as u32 + 1, member_runs)
        })
        .collect()
}

fn build_blob(label: u32, mut runs: Vec<Run>) -> Blob {
    runs.sort_unstable_by_key(|r| (r.y, r.x0));
    let mut area = 0u64;
    let mut sum_x = 0f64;
    let mut sum_y = 0f64;
    let mut bbox = BBox {
        min_x: u32::MAX,
        min_y: u32::MAX,
        max_x: 0,
        max_y: 0,
    };
    for r in &runs {
        let n = r.len() as u64;
        area += n;
        // Sum of x over the run is the arithmetic series mean times count.
        sum_x += (r.x0 + r.x1) as f64 / 2.0 * n as f64;
        sum_y += r.y as f64 * n as f64;
        bbox.min_x = bbox.min_x.min(r.x0);
        bbox.max_x = bbox.max_x.max(r.x1);
        bbox.min_y = bbox.min_y.min(r.y);
        bbox.max_y = bbox.max_y.max(r.y);
    }
    Blob {
        label,
        area: area as u32,
        bbox,
        centroid: (sum_x / area as f64, sum_y / area as f64),
        runs,
    }
}

fn find(parents: &mut [u32], mut id: u32) -> u32 {
    while parents[id as usize] != id {
        let grand = parents[parents[id as usize] as usize];
        parents[id as usize] = grand;
        id = grand;
    }
    id
}

fn union(parents: &mut [u32], a: u32, b: u32) {
    let ra = find(parents, a);
    let rb = find(parents, b);
    if ra != rb {
        // Attach the larger root to the smaller so roots stay raster-minimal.
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parents[hi as usize] = lo;
    }
}

/// Keep blobs with `area >= min_area`, preserving order and labels.
pub fn filter_blobs(blobs: Vec<Blob>, min_area: u32) -> Vec<Blob> {
    blobs.into_iter().filter(|b| b.area >= min_area).collect()
}
