// SPDX-License-Identifier: Apache-2.0

//! Heatmaps as binary PGM (grayscale) or SVG (colored grid). Values map
//! linearly from [min, max] to [0, 255]; a constant map renders as 128.
//! Image row 0 is the top row of the grid (largest y).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::InsightError;
use crate::geom::FeatureMap;
use crate::vector::{Foundation, PatchVec};

/// Patch fields that can be drawn.
pub const HEATMAP_CHANNELS: [&str; 5] = ["cell_density", "pin_density", "net_density", "rudy", "max_congestion"];

/// SVG edge length of one grid cell, in user units.
const SVG_CELL: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Palette {
    /// PGM, one pixel per grid cell.
    Gray,
    /// SVG, black through red and yellow to white.
    Heat,
}

impl Palette {
    pub fn extension(self) -> &'static str {
        match self {
            Palette::Gray => "pgm",
            Palette::Heat => "svg",
        }
    }
}

fn channel_value(p: &PatchVec, channel: &str) -> Option<f64> {
    Some(match channel {
        "cell_density" => p.cell_density,
        "pin_density" => p.pin_density,
        "net_density" => p.net_density,
        "rudy" => p.rudy,
        "max_congestion" => p.max_congestion,
        _ => return None,
    })
}

/// One patch field of a bundle on its patch grid.
pub fn feature_map(bundle: &Foundation, channel: &str) -> Result<FeatureMap, InsightError> {
    let g = &bundle.grid;
    if bundle.patches.len() != g.nx * g.ny {
        return Err(InsightError::InvalidMap(format!(
            "{}: {} patches for a {}x{} grid",
            bundle.design.name,
            bundle.patches.len(),
            g.nx,
            g.ny
        )));
    }
    let mut m = FeatureMap::zeros(g.nx, g.ny);
    for p in &bundle.patches {
        let v = channel_value(p, channel).ok_or_else(|| InsightError::InvalidMap(format!("unknown channel {channel}")))?;
        m.set(p.ix, p.iy, v);
    }
    Ok(m)
}

fn levels(map: &FeatureMap) -> Result<Vec<u8>, InsightError> {
    if map.nx == 0 || map.ny == 0 || map.values.len() != map.nx * map.ny {
        return Err(InsightError::InvalidMap(format!("{}x{} map holds {} values", map.nx, map.ny, map.values.len())));
    }
    if let Some(k) = map.values.iter().position(|v| !v.is_finite()) {
        return Err(InsightError::InvalidMap(format!("value {} at cell {k}", map.values[k])));
    }
    let lo = map.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = map.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = Vec::with_capacity(map.values.len());
    for iy in (0..map.ny).rev() {
        for ix in 0..map.nx {
            let v = map.get(ix, iy);
            out.push(if hi > lo { ((v - lo) / (hi - lo) * 255.0).round() as u8 } else { 128 });
        }
    }
    Ok(out)
}

fn heat(level: u8) -> [u8; 3] {
    let t = 3 * level as u32;
    let c = |x: u32| x.min(255) as u8;
    [c(t), c(t.saturating_sub(255)), c(t.saturating_sub(510))]
}

/// Deterministic image bytes for `map`.
pub fn render_heatmap(map: &FeatureMap, palette: Palette) -> Result<Vec<u8>, InsightError> {
    let px = levels(map)?;
    let (w, h) = (map.nx, map.ny);
    Ok(match palette {
        Palette::Gray => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(&px);
            out
        }
        Palette::Heat => {
            let mut s = String::new();
            let (sw, sh) = (w * SVG_CELL, h * SVG_CELL);
            let _ = writeln!(
                s,
                r#"<svg xmlns="http://www.w3.org/2000/svg" width="{sw}" height="{sh}" viewBox="0 0 {sw} {sh}" shape-rendering="crispEdges">"#
            );
            for (k, &l) in px.iter().enumerate() {
                let [r, g, b] = heat(l);
                let (x, y) = ((k % w) * SVG_CELL, (k / w) * SVG_CELL);
                let _ = writeln!(
                    s,
                    r##"<rect x="{x}" y="{y}" width="{SVG_CELL}" height="{SVG_CELL}" fill="#{r:02x}{g:02x}{b:02x}"/>"##
                );
            }
            s.push_str("</svg>\n");
            s.into_bytes()
        }
    })
}
