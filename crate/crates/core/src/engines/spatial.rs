// SPDX-License-Identifier: Apache-2.0

//! Spatial sets: sliding windows over patch maps and per-net routing masks.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::design::{Diagnostic, NetPinRole};
use crate::geom::{overlap_area, rasterize_segment, GcellGrid, Point, Rect};
use crate::vector::{Foundation, PatchVec};

pub const SPATIAL_CHANNELS: [&str; 4] = ["cell_density", "pin_density", "net_density", "rudy"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialSet {
    pub channels: Vec<String>,
    pub samples: usize,
    pub height: usize,
    pub width: usize,
    /// `samples x channels x height x width`.
    pub inputs: Vec<f64>,
    /// `samples x 1 x height x width`.
    pub labels: Vec<f64>,
    pub groups: Vec<usize>,
    /// Window origin `(ix, iy)` or net index, per sample.
    pub origins: Vec<(usize, usize)>,
    pub skipped: usize,
    pub diagnostics: Vec<Diagnostic>,
}

impl SpatialSet {
    fn empty(channels: Vec<String>, height: usize, width: usize) -> Self {
        Self {
            channels,
            samples: 0,
            height,
            width,
            inputs: Vec::new(),
            labels: Vec::new(),
            groups: Vec::new(),
            origins: Vec::new(),
            skipped: 0,
            diagnostics: Vec::new(),
        }
    }

    /// Appends another set with the same layout.
    pub fn extend(&mut self, other: SpatialSet) {
        assert_eq!((&self.channels, self.height, self.width), (&other.channels, other.height, other.width));
        self.samples += other.samples;
        self.inputs.extend(other.inputs);
        self.labels.extend(other.labels);
        self.groups.extend(other.groups);
        self.origins.extend(other.origins);
        self.skipped += other.skipped;
        self.diagnostics.extend(other.diagnostics);
    }

    pub fn shape(&self) -> [usize; 4] {
        [self.samples, self.channels.len(), self.height, self.width]
    }
}

fn raw_channels(p: &PatchVec) -> [f64; 4] {
    [p.cell_density, p.pin_density, p.net_density, p.rudy]
}

fn patches_of(b: &Foundation) -> Result<&[PatchVec], EngineError> {
    if b.patches.len() != b.grid.len() || b.patches.is_empty() {
        return Err(EngineError::EmptyDataset(format!("{} has no patch level", b.design.name)));
    }
    Ok(&b.patches)
}

/// `window x window` tiles every `stride` patches in row-major scan order;
/// the label is the per-patch maximum layer congestion.
pub fn spatial_congestion(b: &Foundation, group: usize, window: usize, stride: usize) -> Result<SpatialSet, EngineError> {
    if window < 1 {
        return Err(EngineError::Config("window".into()));
    }
    if stride < 1 {
        return Err(EngineError::Config("stride".into()));
    }
    let patches = patches_of(b)?;
    let (nx, ny) = (b.grid.nx, b.grid.ny);
    if nx < window || ny < window {
        return Err(EngineError::GridTooSmall { nx, ny, window });
    }
    let mut set = SpatialSet::empty(SPATIAL_CHANNELS.iter().map(|s| s.to_string()).collect(), window, window);
    let plane = window * window;
    for wy in 0..=(ny - window) / stride {
        for wx in 0..=(nx - window) / stride {
            let (x0, y0) = (wx * stride, wy * stride);
            let base = set.inputs.len();
            set.inputs.resize(base + 4 * plane, 0.0);
            for y in 0..window {
                for x in 0..window {
                    let p = &patches[b.grid.index(x0 + x, y0 + y)];
                    for (c, v) in raw_channels(p).into_iter().enumerate() {
                        set.inputs[base + c * plane + y * window + x] = v;
                    }
                    set.labels.push(p.max_congestion);
                }
            }
            set.groups.push(group);
            set.origins.push((x0, y0));
            set.samples += 1;
        }
    }
    Ok(set)
}

/// Min-max normalized patch channels, `[channel][patch]`; constant channels become 0.
fn normalized_maps(patches: &[PatchVec]) -> Vec<Vec<f64>> {
    (0..4)
        .map(|c| {
            let v: Vec<f64> = patches.iter().map(|p| raw_channels(p)[c]).collect();
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            v.iter().map(|x| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 }).collect()
        })
        .collect()
}

/// Area-weighted mean of a patch map over `r`; area outside the grid counts as 0.
fn pooled(grid: &GcellGrid, map: &[f64], r: &Rect) -> f64 {
    let area = r.area() as f64;
    let Some((x0, y0, x1, y1)) = grid.cell_span(r) else { return 0.0 };
    let mut acc = 0.0;
    for iy in y0..=y1 {
        for ix in x0..=x1 {
            acc += map[grid.index(ix, iy)] * overlap_area(r, &grid.cell_rect(ix, iy)) as f64;
        }
    }
    acc / area
}

/// Square region around a pin box, a multiple of `size` DBU wide, with a
/// quarter-span margin and at least two patches across.
fn region_of(bbox: &Rect, patch: i64, size: usize) -> Rect {
    let span = bbox.width().max(bbox.height());
    let s = size as i64;
    let side = (span + span / 4 + 2).max(2 * patch);
    let side = (side + s - 1) / s * s;
    let cx = (bbox.lo.x + bbox.hi.x) / 2;
    let cy = (bbox.lo.y + bbox.hi.y) / 2;
    let lo = Point::new(cx - side / 2, cy - side / 2);
    Rect { lo, hi: Point::new(lo.x + side, lo.y + side) }
}

/// One sample per routed two-pin net: 4 normalized patch channels, the same
/// four minus their region mean, a one-hot source and a one-hot target,
/// all pooled to `size x size`. The label marks cells whose wire coverage
/// (length over cell width) reaches `threshold`.
pub fn routing_mask(
    b: &Foundation,
    group: usize,
    size: usize,
    threshold: f64,
    max_samples: usize,
    seed: u64,
) -> Result<SpatialSet, EngineError> {
    if size < 1 {
        return Err(EngineError::Config("mask_size".into()));
    }
    let patches = patches_of(b)?;
    let maps = normalized_maps(patches);
    let names = [
        "cell_density", "pin_density", "net_density", "rudy", "cell_density_rel", "pin_density_rel",
        "net_density_rel", "rudy_rel", "source", "target",
    ];
    let mut set = SpatialSet::empty(names.iter().map(|s| s.to_string()).collect(), size, size);
    let mut eligible: Vec<usize> = (0..b.nets.len())
        .filter(|&i| {
            let n = &b.nets[i];
            n.pins.len() == 2 && n.pins.iter().any(|p| p.role == NetPinRole::Driver) && !n.wires.is_empty()
        })
        .collect();
    if max_samples > 0 && eligible.len() > max_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ crate::store::fnv1a(b.design.name.as_bytes()));
        eligible.shuffle(&mut rng);
        eligible.truncate(max_samples);
        eligible.sort_unstable();
    }
    let plane = size * size;
    let patch_edge = b.grid.cell_w.max(b.grid.cell_h);
    for i in eligible {
        let n = &b.nets[i];
        let region = region_of(&n.bbox, patch_edge, size);
        let cell = region.width() / size as i64;
        let out = GcellGrid::covering(region, cell, cell).expect("positive cell");
        let drv = n.pins.iter().find(|p| p.role == NetPinRole::Driver).expect("filtered");
        let load = n.pins.iter().find(|p| p.role == NetPinRole::Load);
        let (Some(src), Some(dst)) = (out.cell_of(drv.position), load.and_then(|l| out.cell_of(l.position))) else {
            set.skipped += 1;
            continue;
        };
        let base = set.inputs.len();
        set.inputs.resize(base + 10 * plane, 0.0);
        for c in 0..4 {
            for y in 0..size {
                for x in 0..size {
                    set.inputs[base + c * plane + y * size + x] = pooled(&b.grid, &maps[c], &out.cell_rect(x, y));
                }
            }
            let mean = set.inputs[base + c * plane..base + (c + 1) * plane].iter().sum::<f64>() / plane as f64;
            for k in 0..plane {
                set.inputs[base + (c + 4) * plane + k] = set.inputs[base + c * plane + k] - mean;
            }
        }
        set.inputs[base + 8 * plane + src.1 * size + src.0] = 1.0;
        set.inputs[base + 9 * plane + dst.1 * size + dst.0] = 1.0;
        let mut cover = vec![0i64; plane];
        for w in &n.wires {
            let Some(piece) = w.clip(&region) else { continue };
            for (k, len) in rasterize_segment(&piece, &out).expect("clipped into region") {
                cover[k] += len;
            }
        }
        set.labels.extend(cover.iter().map(|&l| if l as f64 >= threshold * cell as f64 { 1.0 } else { 0.0 }));
        set.groups.push(group);
        set.origins.push((n.index, 0));
        set.samples += 1;
    }
    if set.skipped > 0 {
        set.diagnostics.push(Diagnostic::new(None, format!("{}: {} mask sample(s) skipped", b.design.name, set.skipped)));
    }
    Ok(set)
}
