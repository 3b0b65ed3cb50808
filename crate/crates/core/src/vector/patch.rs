// SPDX-License-Identifier: Apache-2.0

//! Patch-level density, RUDY and per-layer routing demand.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::path::PathVec;
use super::VectorError;
use crate::design::Design;
use crate::geom::{overlap_area, rasterize_segment, GcellGrid, Rect, WireSegment};

/// Piece of a net's wire inside one patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fragment {
    /// Canonical net index.
    pub net: usize,
    pub wire: WireSegment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchVec {
    pub id: usize,
    pub ix: usize,
    pub iy: usize,
    pub boundary: Rect,
    pub cell_density: f64,
    /// Pins per area, divided by the design maximum.
    pub pin_density: f64,
    /// Nets whose pin bbox touches the patch, divided by the design maximum.
    pub net_density: f64,
    pub rudy: f64,
    pub layer_wirelength: BTreeMap<u32, i64>,
    /// Wirelength per patch area, 1/DBU.
    pub wire_density: BTreeMap<u32, f64>,
    /// Wirelength over track capacity `area / pitch`.
    pub congestion: BTreeMap<u32, f64>,
    /// Largest per-layer congestion.
    pub max_congestion: f64,
    /// Keyed by the via's bottom layer.
    pub via_count: BTreeMap<u32, usize>,
    /// Worst slack of paths with a stage inside the patch.
    pub worst_slack: Option<f64>,
    pub fragments: Vec<Fragment>,
}

/// Patch grid over the die: square cells of `patch_multiple` reference-layer pitches.
pub fn patch_grid(design: &Design, patch_multiple: u32, reference_layer: u32) -> Result<GcellGrid, VectorError> {
    if patch_multiple == 0 {
        return Err(VectorError::Config("patch_multiple".into()));
    }
    let layer = design
        .tech
        .layer(reference_layer)
        .ok_or_else(|| VectorError::Config(format!("reference layer {reference_layer} not in technology")))?;
    let edge = layer.pitch * patch_multiple as i64;
    Ok(GcellGrid::covering(design.die, edge, edge)?)
}

/// Piece of `seg` inside the half-open span of cell `(ix, iy)`.
fn clip_to_cell(seg: &WireSegment, grid: &GcellGrid, ix: usize, iy: usize) -> WireSegment {
    let r = grid.cell_rect(ix, iy);
    let mut s = *seg;
    if seg.ys == seg.ye {
        let (lo, hi) = (seg.xs.min(seg.xe).max(r.lo.x), seg.xs.max(seg.xe).min(r.lo.x + grid.cell_w));
        if seg.xs <= seg.xe {
            (s.xs, s.xe) = (lo, hi);
        } else {
            (s.xs, s.xe) = (hi, lo);
        }
    } else {
        let (lo, hi) = (seg.ys.min(seg.ye).max(r.lo.y), seg.ys.max(seg.ye).min(r.lo.y + grid.cell_h));
        if seg.ys <= seg.ye {
            (s.ys, s.ye) = (lo, hi);
        } else {
            (s.ys, s.ye) = (hi, lo);
        }
    }
    s
}

#[derive(Default)]
struct NetContrib {
    net_cells: Vec<usize>,
    rudy: Vec<(usize, f64)>,
    wires: Vec<(usize, u32, i64, WireSegment)>,
    vias: Vec<(usize, u32)>,
}

fn net_contrib(design: &Design, grid: &GcellGrid, index: usize) -> Result<NetContrib, VectorError> {
    let net = &design.nets[index];
    let mut c = NetContrib::default();
    if let Some(b) = Rect::bounding(net.pin_points()) {
        if let Some((x0, y0, x1, y1)) = grid.cell_span(&b) {
            for iy in y0..=y1 {
                for ix in x0..=x1 {
                    c.net_cells.push(grid.index(ix, iy));
                }
            }
            let (w, h) = (b.width(), b.height());
            if w > 0 || h > 0 {
                // a line bbox gets 1 DBU of thickness
                let inflated = Rect { lo: b.lo, hi: crate::geom::Point::new(b.lo.x + w.max(1), b.lo.y + h.max(1)) };
                let (w, h) = (inflated.width() as f64, inflated.height() as f64);
                let factor = (w + h) / (w * h);
                for iy in y0..=y1 {
                    for ix in x0..=x1 {
                        let cell = grid.cell_rect(ix, iy);
                        let area = cell.area() as f64;
                        let ov = overlap_area(&inflated, &cell) as f64;
                        if ov > 0.0 && area > 0.0 {
                            c.rudy.push((grid.index(ix, iy), factor * ov / area));
                        }
                    }
                }
            }
        }
    }
    for w in &net.routing {
        for (cell, len) in rasterize_segment(w, grid)? {
            let (ix, iy) = grid.coords(cell);
            let piece = if len > 0 { clip_to_cell(w, grid, ix, iy) } else { *w };
            c.wires.push((cell, w.layer, len, piece));
        }
    }
    for v in &net.vias {
        let (ix, iy) = grid
            .cell_of(v.at())
            .ok_or_else(|| VectorError::Config(format!("via of net {} outside the die", net.name)))?;
        c.vias.push((grid.index(ix, iy), v.layer_bot));
    }
    Ok(c)
}

/// Patch vectors on [`patch_grid`], in row-major order.
pub fn patch_features(
    design: &Design,
    patch_multiple: u32,
    reference_layer: u32,
    paths: &[PathVec],
) -> Result<(GcellGrid, Vec<PatchVec>), VectorError> {
    let grid = patch_grid(design, patch_multiple, reference_layer)?;
    let n = grid.len();
    let mut patches: Vec<PatchVec> = (0..n)
        .map(|id| {
            let (ix, iy) = grid.coords(id);
            PatchVec {
                id,
                ix,
                iy,
                boundary: grid.cell_rect(ix, iy),
                cell_density: 0.0,
                pin_density: 0.0,
                net_density: 0.0,
                rudy: 0.0,
                layer_wirelength: BTreeMap::new(),
                wire_density: BTreeMap::new(),
                congestion: BTreeMap::new(),
                max_congestion: 0.0,
                via_count: BTreeMap::new(),
                worst_slack: None,
                fragments: Vec::new(),
            }
        })
        .collect();
    let area: Vec<f64> = patches.iter().map(|p| p.boundary.area() as f64).collect();

    let mut cell_area = vec![0i128; n];
    for inst in &design.instances {
        let fp = design.footprint(inst);
        if let Some((x0, y0, x1, y1)) = grid.cell_span(&fp) {
            for iy in y0..=y1 {
                for ix in x0..=x1 {
                    cell_area[grid.index(ix, iy)] += overlap_area(&fp, &grid.cell_rect(ix, iy));
                }
            }
        }
    }

    let mut pins = vec![0usize; n];
    for net in &design.nets {
        for p in &net.pins {
            if let Some((ix, iy)) = grid.cell_of(p.position) {
                pins[grid.index(ix, iy)] += 1;
            }
        }
    }

    let contribs: Vec<NetContrib> =
        (0..design.nets.len()).into_par_iter().map(|i| net_contrib(design, &grid, i)).collect::<Result<_, _>>()?;
    let mut nets = vec![0usize; n];
    for (net, c) in contribs.into_iter().enumerate() {
        for cell in c.net_cells {
            nets[cell] += 1;
        }
        for (cell, v) in c.rudy {
            patches[cell].rudy += v;
        }
        for (cell, layer, len, wire) in c.wires {
            *patches[cell].layer_wirelength.entry(layer).or_default() += len;
            patches[cell].fragments.push(Fragment { net, wire });
        }
        for (cell, layer) in c.vias {
            *patches[cell].via_count.entry(layer).or_default() += 1;
        }
    }

    let pin_d: Vec<f64> = (0..n).map(|i| if area[i] > 0.0 { pins[i] as f64 / area[i] } else { 0.0 }).collect();
    let pin_max = pin_d.iter().copied().fold(0.0, f64::max);
    let net_max = nets.iter().copied().max().unwrap_or(0);
    for (i, p) in patches.iter_mut().enumerate() {
        if area[i] > 0.0 {
            p.cell_density = cell_area[i] as f64 / area[i];
        }
        if pin_max > 0.0 {
            p.pin_density = pin_d[i] / pin_max;
        }
        if net_max > 0 {
            p.net_density = nets[i] as f64 / net_max as f64;
        }
        for (&layer, &wl) in &p.layer_wirelength {
            let pitch = design.tech.layer(layer).map(|l| l.pitch).unwrap_or(1).max(1) as f64;
            let (wd, cg) = if area[i] > 0.0 { (wl as f64 / area[i], wl as f64 * pitch / area[i]) } else { (0.0, 0.0) };
            p.wire_density.insert(layer, wd);
            p.congestion.insert(layer, cg);
            p.max_congestion = p.max_congestion.max(cg);
        }
    }

    for path in paths {
        for node in &path.nodes {
            if let Some((ix, iy)) = grid.cell_of(node.position) {
                let s = &mut patches[grid.index(ix, iy)].worst_slack;
                *s = Some(s.map_or(path.slack, |v: f64| v.min(path.slack)));
            }
        }
    }
    Ok((grid, patches))
}
