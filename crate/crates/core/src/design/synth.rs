// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic placed-and-routed designs.
//!
//! Placement follows a smooth density field made of Gaussian hotspots so that
//! density maps stay correlated across grid resolutions. Logic is levelized:
//! a combinational driver at level `v` only loads cells at levels above `v`
//! or flip-flop data pins, which keeps the netlist acyclic.

use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tech::{ClassRule, Layer, LayerDirection, Master, MasterClass, MasterPin, PinDirection, Site, TechLib, ViaDef};
use super::{classify_instance, Design, DesignError, Instance, InstanceClass, Net, NetPin, NetPinRole, Orient, PinOwner, Port};
use crate::geom::{Point, Rect, ViaInstance, WireSegment};

pub const SITE_WIDTH: i64 = 200;
pub const ROW_HEIGHT: i64 = 1400;
const DIE_MARGIN: i64 = 5000;
const CLOCK_FANOUT: usize = 32;
const BIN_SIZE: i64 = 4 * ROW_HEIGHT;
const MAX_RING: i64 = 4;
const LEVEL_PENALTY: f64 = 1500.0;
const GLOBAL_PROBES: usize = 64;

/// Default net-degree distribution; 80% of nets have two or three pins.
pub const DEFAULT_PIN_DISTRIBUTION: [(usize, f64); 10] = [
    (2, 0.58),
    (3, 0.22),
    (4, 0.08),
    (5, 0.04),
    (6, 0.03),
    (7, 0.02),
    (8, 0.01),
    (10, 0.01),
    (16, 0.007),
    (24, 0.003),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub name: String,
    pub seed: u64,
    pub num_instances: usize,
    /// Target number of signal nets; clock nets come on top.
    pub num_nets: usize,
    /// Core size in DBU. Zero derives a square core from `utilization`.
    pub core_width: i64,
    pub core_height: i64,
    pub utilization: f64,
    pub num_layers: u32,
    /// `(pin count, weight)` pairs.
    pub pin_distribution: Vec<(usize, f64)>,
    pub num_inputs: Option<usize>,
    pub num_outputs: Option<usize>,
    pub dff_fraction: f64,
    pub logic_levels: u32,
    pub hotspots: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            name: "synth".to_string(),
            seed: 1,
            num_instances: 1000,
            num_nets: 900,
            core_width: 0,
            core_height: 0,
            utilization: 0.6,
            num_layers: 6,
            pin_distribution: DEFAULT_PIN_DISTRIBUTION.to_vec(),
            num_inputs: None,
            num_outputs: None,
            dff_fraction: 0.15,
            logic_levels: 16,
            hotspots: 3,
        }
    }
}

impl SynthParams {
    /// Defaults scaled to `cells` instances with nets at 90% of the cell count.
    pub fn for_cells(cells: usize) -> Self {
        Self { num_instances: cells, num_nets: cells * 9 / 10, ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<(), DesignError> {
        let bad = |m: &str| Err(DesignError::Invalid(format!("synthetic parameters: {m}")));
        if self.num_instances == 0 {
            return bad("num_instances must be positive");
        }
        if !(2..=15).contains(&self.num_layers) {
            return bad("num_layers must be in 2..=15");
        }
        if !(self.utilization > 0.0 && self.utilization <= 1.0) {
            return bad("utilization must be in (0, 1]");
        }
        if !(0.0..1.0).contains(&self.dff_fraction) {
            return bad("dff_fraction must be in [0, 1)");
        }
        if self.logic_levels == 0 {
            return bad("logic_levels must be positive");
        }
        if self.core_width < 0 || self.core_height < 0 || (self.core_width == 0) != (self.core_height == 0) {
            return bad("core_width and core_height must both be zero or both positive");
        }
        if self.pin_distribution.is_empty()
            || self.pin_distribution.iter().any(|&(k, w)| k < 2 || !(w >= 0.0) || !w.is_finite())
            || self.pin_distribution.iter().map(|p| p.1).sum::<f64>() <= 0.0
        {
            return bad("pin_distribution needs pin counts >= 2 and non-negative weights");
        }
        Ok(())
    }
}

struct CellSpec {
    name: &'static str,
    sites: i64,
    inputs: &'static [&'static str],
    output: &'static str,
    drive: f64,
    intrinsic: f64,
    weight: f64,
}

const COMBINATIONAL: [CellSpec; 7] = [
    CellSpec { name: "INV_X1", sites: 2, inputs: &["A"], output: "Z", drive: 2000.0, intrinsic: 22e-12, weight: 0.10 },
    CellSpec { name: "BUF_X1", sites: 3, inputs: &["A"], output: "Z", drive: 1500.0, intrinsic: 34e-12, weight: 0.05 },
    CellSpec { name: "NAND2_X1", sites: 3, inputs: &["A", "B"], output: "Z", drive: 2500.0, intrinsic: 26e-12, weight: 0.20 },
    CellSpec { name: "NOR2_X1", sites: 3, inputs: &["A", "B"], output: "Z", drive: 3000.0, intrinsic: 30e-12, weight: 0.10 },
    CellSpec { name: "NAND3_X1", sites: 4, inputs: &["A", "B", "C"], output: "Z", drive: 3200.0, intrinsic: 36e-12, weight: 0.10 },
    CellSpec { name: "AOI21_X1", sites: 4, inputs: &["A", "B", "C"], output: "Z", drive: 3500.0, intrinsic: 40e-12, weight: 0.15 },
    CellSpec { name: "AOI22_X1", sites: 5, inputs: &["A", "B", "C", "D"], output: "Z", drive: 4000.0, intrinsic: 48e-12, weight: 0.15 },
];
const DFF: CellSpec =
    CellSpec { name: "DFF_X1", sites: 10, inputs: &["D", "CK"], output: "Q", drive: 2500.0, intrinsic: 90e-12, weight: 0.0 };
const CLKBUF: CellSpec =
    CellSpec { name: "CLKBUF_X1", sites: 4, inputs: &["A"], output: "Z", drive: 800.0, intrinsic: 15e-12, weight: 0.0 };

fn layer_pitch(index: u32) -> i64 {
    match index {
        1 | 2 => 200,
        3 | 4 => 280,
        5 | 6 => 400,
        _ => 800,
    }
}

fn layer_unit_r(index: u32) -> f64 {
    match index {
        1 | 2 => 0.008,
        3 | 4 => 0.004,
        5 | 6 => 0.002,
        _ => 0.001,
    }
}

fn master_from_spec(spec: &CellSpec, sequential: bool) -> Master {
    let width = spec.sites * SITE_WIDTH;
    let height = ROW_HEIGHT;
    let names: Vec<(&str, PinDirection)> = spec
        .inputs
        .iter()
        .map(|&n| (n, PinDirection::Input))
        .chain(std::iter::once((spec.output, PinDirection::Output)))
        .collect();
    let k = names.len() as i64;
    let pins = names
        .iter()
        .enumerate()
        .map(|(j, &(name, direction))| {
            let cx = (2 * j as i64 + 1) * width / (2 * k);
            let cy = height / 2;
            let is_clock = sequential && name == "CK";
            MasterPin {
                name: name.to_string(),
                direction,
                is_clock,
                offset: Point::new(cx, cy),
                shape: Rect { lo: Point::new(cx - 50, cy - 50), hi: Point::new(cx + 50, cy + 50) },
                capacitance: match direction {
                    PinDirection::Output => 0.0,
                    _ if is_clock => 1.5e-15,
                    _ => 1.2e-15,
                },
            }
        })
        .collect();
    Master {
        name: spec.name.to_string(),
        width,
        height,
        class: Some(MasterClass::Core),
        pins,
        drive_resistance: spec.drive,
        intrinsic_delay: spec.intrinsic,
        is_sequential: sequential,
    }
}

/// Technology used by the synthetic generator: alternating H/V layers
/// `M1..Mn` (M1 horizontal), adjacent-layer vias and a small cell library.
pub fn synthetic_tech(num_layers: u32) -> Result<TechLib, DesignError> {
    if !(2..=15).contains(&num_layers) {
        return Err(DesignError::Tech(format!("num_layers {num_layers} outside 2..=15")));
    }
    let layers = (1..=num_layers)
        .map(|i| Layer {
            name: format!("M{i}"),
            index: i,
            pitch: layer_pitch(i),
            direction: if i % 2 == 1 { LayerDirection::Horizontal } else { LayerDirection::Vertical },
            unit_r: layer_unit_r(i),
            unit_c: 2e-19,
        })
        .collect();
    let vias = (1..num_layers)
        .map(|i| ViaDef {
            name: format!("VIA{i}_{}", i + 1),
            layer_bot: i,
            layer_top: i + 1,
            resistance: if i < 4 { 4.0 } else { 2.0 },
        })
        .collect();
    let mut masters: Vec<Master> = COMBINATIONAL.iter().map(|s| master_from_spec(s, false)).collect();
    masters.push(master_from_spec(&DFF, true));
    masters.push(master_from_spec(&CLKBUF, false));
    TechLib::new(
        1000,
        layers,
        vias,
        vec![Site { name: "core".to_string(), width: SITE_WIDTH, height: ROW_HEIGHT }],
        masters,
        vec![ClassRule { prefix: "CLK".to_string(), class: InstanceClass::Clock }],
    )
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Comb(usize),
    Dff,
    ClkBuf,
}

impl Kind {
    fn spec(self) -> &'static CellSpec {
        match self {
            Kind::Comb(i) => &COMBINATIONAL[i],
            Kind::Dff => &DFF,
            Kind::ClkBuf => &CLKBUF,
        }
    }
}

struct Hotspot {
    cx: f64,
    cy: f64,
    inv_two_sigma2: f64,
    amp: f64,
}

struct Field {
    base: f64,
    spots: Vec<Hotspot>,
}

impl Field {
    fn new(core: &Rect, count: usize, rng: &mut ChaCha8Rng) -> Self {
        let span = core.width().max(core.height()) as f64;
        let spots = (0..count)
            .map(|_| {
                let sigma = rng.gen_range(0.15..0.35) * span;
                Hotspot {
                    cx: rng.gen_range(core.lo.x as f64..=core.hi.x as f64),
                    cy: rng.gen_range(core.lo.y as f64..=core.hi.y as f64),
                    inv_two_sigma2: 1.0 / (2.0 * sigma * sigma),
                    amp: rng.gen_range(0.6..1.2),
                }
            })
            .collect();
        Self { base: 0.25, spots }
    }

    fn at(&self, x: f64, y: f64) -> f64 {
        self.base
            + self
                .spots
                .iter()
                .map(|s| {
                    let d2 = (x - s.cx).powi(2) + (y - s.cy).powi(2);
                    s.amp * (-d2 * s.inv_two_sigma2).exp()
                })
                .sum::<f64>()
    }
}

/// Places cells into rows so that local utilization follows
/// `min(1, k * field)`, with `k` chosen to fit the total cell width. Cells go
/// to rows in order by row quota and, within a row, to the positions where
/// the cumulative cell width tracks the cumulative target density. Returns
/// per-instance `(row, site)`.
fn place(kinds: &[Kind], rows: usize, sites: i64, core: &Rect, field: &Field) -> Result<Vec<(usize, i64)>, DesignError> {
    let cols = sites as usize;
    let width = |i: usize| kinds[i].spec().sites;
    let total: i64 = (0..kinds.len()).map(width).sum();
    let raw: Vec<f64> = (0..rows * cols)
        .map(|k| {
            let (r, c) = (k / cols, k % cols);
            let x = core.lo.x as f64 + (c as f64 + 0.5) * SITE_WIDTH as f64;
            let y = core.lo.y as f64 + (r as f64 + 0.5) * ROW_HEIGHT as f64;
            field.at(x, y)
        })
        .collect();
    let fill = |k: f64| raw.iter().map(|&f| (k * f).min(1.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, 1.0 / raw.iter().copied().fold(f64::INFINITY, f64::min));
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if fill(mid) < total as f64 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let density: Vec<f64> = raw.iter().map(|&f| (hi * f).min(1.0)).collect();

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); rows];
    let mut used = vec![0i64; rows];
    let mut next = 0;
    let mut carry = 0.0;
    for r in 0..rows {
        let quota = density[r * cols..(r + 1) * cols].iter().sum::<f64>() + carry;
        while next < kinds.len() {
            let w = width(next);
            if used[r] + w > sites || (used[r] + w) as f64 > quota + w as f64 / 2.0 {
                break;
            }
            used[r] += w;
            members[r].push(next);
            next += 1;
        }
        carry = quota - used[r] as f64;
    }
    for i in next..kinds.len() {
        let w = width(i);
        let r = (0..rows)
            .filter(|&r| used[r] + w <= sites)
            .max_by_key(|&r| (sites - used[r], std::cmp::Reverse(r)))
            .ok_or_else(|| DesignError::Capacity(format!("no row can take instance {i} ({w} sites)")))?;
        used[r] += w;
        members[r].push(i);
    }

    let mut out = vec![(0usize, 0i64); kinds.len()];
    let mut prefix = vec![0.0; cols + 1];
    for (r, row) in members.iter().enumerate() {
        for c in 0..cols {
            prefix[c + 1] = prefix[c] + density[r * cols + c];
        }
        let scale = if used[r] > 0 { prefix[cols] / used[r] as f64 } else { 0.0 };
        let mut start = 0i64;
        let mut desired = Vec::with_capacity(row.len());
        for &i in row {
            let w = width(i);
            let t = (start as f64 + w as f64 / 2.0) * scale;
            // column where the cumulative density reaches t, interpolated inside it
            let c = prefix.partition_point(|&p| p < t).clamp(1, cols) - 1;
            let d = density[r * cols + c];
            let x = c as f64 + if d > 0.0 { ((t - prefix[c]) / d).clamp(0.0, 1.0) } else { 0.5 };
            desired.push(x - w as f64 / 2.0);
            start += w;
        }
        let mut pos: Vec<i64> = Vec::with_capacity(row.len());
        let mut end = 0i64;
        for (&i, &want) in row.iter().zip(&desired) {
            let w = width(i);
            let p = (want.round() as i64).clamp(0, sites - w).max(end);
            pos.push(p);
            end = p + w;
        }
        let mut limit = sites;
        for (j, &i) in row.iter().enumerate().rev() {
            pos[j] = pos[j].min(limit - width(i));
            limit = pos[j];
        }
        if limit < 0 {
            return Err(DesignError::Capacity(format!("row {r} over capacity")));
        }
        for (j, &i) in row.iter().enumerate() {
            out[i] = (r, pos[j]);
        }
    }
    Ok(out)
}

struct LoadPicker<'a> {
    bins: Vec<Vec<u32>>,
    bx: i64,
    by: i64,
    origin: Point,
    alive: Vec<u32>,
    free: Vec<Vec<&'static str>>,
    level: &'a [u32],
    center: &'a [Point],
}

impl LoadPicker<'_> {
    fn bin_of(&self, p: Point) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / BIN_SIZE).clamp(0, self.bx - 1),
            ((p.y - self.origin.y) / BIN_SIZE).clamp(0, self.by - 1),
        )
    }

    fn pick(
        &mut self,
        from: Point,
        driver: Option<usize>,
        driver_level: u32,
        need: usize,
        rng: &mut ChaCha8Rng,
    ) -> Vec<usize> {
        let level = self.level;
        let center = self.center;
        let valid = |i: usize| Some(i) != driver && level[i] > driver_level;
        let (cx, cy) = self.bin_of(from);
        let mut cand: Vec<(f64, usize)> = Vec::new();
        for ring in 0..=MAX_RING {
            for y in cy - ring..=cy + ring {
                if y < 0 || y >= self.by {
                    continue;
                }
                for x in cx - ring..=cx + ring {
                    if x < 0 || x >= self.bx || ((y - cy).abs() != ring && (x - cx).abs() != ring) {
                        continue;
                    }
                    let b = (y * self.bx + x) as usize;
                    let free = &self.free;
                    self.bins[b].retain(|&i| !free[i as usize].is_empty());
                    for &i in &self.bins[b] {
                        let i = i as usize;
                        if valid(i) {
                            let gap = (level[i] - driver_level - 1) as f64;
                            let d = from.manhattan(center[i]) as f64 * rng.gen_range(0.75..1.25);
                            cand.push((d + LEVEL_PENALTY * gap, i));
                        }
                    }
                }
            }
            if ring >= 1 && cand.len() >= need * 4 {
                break;
            }
        }
        cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut chosen: Vec<usize> = cand.iter().take(need).map(|c| c.1).collect();
        let mut probes = 0;
        while chosen.len() < need && probes < GLOBAL_PROBES && !self.alive.is_empty() {
            probes += 1;
            let j = rng.gen_range(0..self.alive.len());
            let i = self.alive[j] as usize;
            if self.free[i].is_empty() {
                self.alive.swap_remove(j);
                continue;
            }
            if valid(i) && !chosen.contains(&i) {
                chosen.push(i);
            }
        }
        chosen
    }
}

/// Rectilinear MST (Prim) over points; edges as `(parent, child)` indices.
fn prim_mst(points: &[Point]) -> Vec<(usize, usize)> {
    let n = points.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![(i64::MAX, 0usize); n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    if n == 0 {
        return edges;
    }
    in_tree[0] = true;
    for j in 1..n {
        best[j] = (points[0].manhattan(points[j]), 0);
    }
    for _ in 1..n {
        let mut pick = usize::MAX;
        for j in 0..n {
            if !in_tree[j] && (pick == usize::MAX || best[j].0 < best[pick].0) {
                pick = j;
            }
        }
        in_tree[pick] = true;
        edges.push((best[pick].1, pick));
        for j in 0..n {
            if !in_tree[j] {
                let d = points[pick].manhattan(points[j]);
                if d < best[j].0 {
                    best[j] = (d, pick);
                }
            }
        }
    }
    edges
}

/// L-routes every MST edge on an adjacent layer pair picked by net size,
/// with via stacks from M1 at each pin.
fn route_net(points: &[Point], num_layers: u32, rng: &mut ChaCha8Rng) -> (Vec<WireSegment>, Vec<ViaInstance>) {
    let mut segs = Vec::new();
    let mut vias = Vec::new();
    if points.len() < 2 {
        return (segs, vias);
    }
    let bbox = Rect::bounding(points.iter().copied()).expect("non-empty");
    let span = (bbox.width() + bbox.height()).max(1) as f64;
    let pairs: Vec<u32> = if num_layers == 2 { vec![1] } else { (2..num_layers).collect() };
    let mut class = if span < 4000.0 { 0 } else { ((span / 4000.0).log(4.0).floor() as usize) + 1 };
    if rng.gen_bool(0.25) {
        class += 1;
    }
    let lo = pairs[class.min(pairs.len() - 1)];
    let (h, v) = if lo % 2 == 1 { (lo, lo + 1) } else { (lo + 1, lo) };
    let (vb, vt) = (lo, lo + 1);
    let mut need = vec![1u32; points.len()];
    for (a, b) in prim_mst(points) {
        let (p, q) = (points[a], points[b]);
        if p == q {
            continue;
        }
        let seg = |s: Point, e: Point, l: u32| WireSegment { xs: s.x, ys: s.y, xe: e.x, ye: e.y, layer: l };
        if p.y == q.y {
            segs.push(seg(p, q, h));
            need[a] = need[a].max(h);
            need[b] = need[b].max(h);
        } else if p.x == q.x {
            segs.push(seg(p, q, v));
            need[a] = need[a].max(v);
            need[b] = need[b].max(v);
        } else if rng.gen_bool(0.5) {
            let c = Point::new(q.x, p.y);
            segs.push(seg(p, c, h));
            segs.push(seg(c, q, v));
            vias.push(ViaInstance { xc: c.x, yc: c.y, layer_bot: vb, layer_top: vt });
            need[a] = need[a].max(h);
            need[b] = need[b].max(v);
        } else {
            let c = Point::new(p.x, q.y);
            segs.push(seg(p, c, v));
            segs.push(seg(c, q, h));
            vias.push(ViaInstance { xc: c.x, yc: c.y, layer_bot: vb, layer_top: vt });
            need[a] = need[a].max(v);
            need[b] = need[b].max(h);
        }
    }
    for (p, &top) in points.iter().zip(&need) {
        for l in 1..top {
            vias.push(ViaInstance { xc: p.x, yc: p.y, layer_bot: l, layer_top: l + 1 });
        }
    }
    let seg_key = |s: &WireSegment| (s.layer, s.xs, s.ys, s.xe, s.ye);
    segs.sort_by_key(seg_key);
    segs.dedup();
    vias.sort_by_key(|v| (v.layer_bot, v.xc, v.yc));
    vias.dedup();
    (segs, vias)
}

fn digits(n: usize) -> usize {
    n.max(1).to_string().len()
}

/// Generates a placed, fully routed design. Identical parameters give
/// identical designs.
pub fn generate_synthetic(params: &SynthParams) -> Result<Design, DesignError> {
    params.validate()?;
    let tech = Arc::new(synthetic_tech(params.num_layers)?);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.num_instances;
    let levels = params.logic_levels;

    let n_dff = (n as f64 * params.dff_fraction).round() as usize;
    let n_clk = n_dff.div_ceil(CLOCK_FANOUT);
    if n_dff + n_clk > n {
        return Err(DesignError::Invalid("too few instances for the flip-flop fraction".into()));
    }
    let weights = WeightedIndex::new(COMBINATIONAL.iter().map(|c| c.weight)).expect("static weights");
    let mut kinds: Vec<Kind> = (0..n)
        .map(|i| {
            if i < n_dff {
                Kind::Dff
            } else if i < n_dff + n_clk {
                Kind::ClkBuf
            } else {
                Kind::Comb(weights.sample(&mut rng))
            }
        })
        .collect();
    kinds.shuffle(&mut rng);

    let total_sites: i64 = kinds.iter().map(|k| k.spec().sites).sum();
    let widest = kinds.iter().map(|k| k.spec().sites).max().unwrap_or(1);
    let (rows, sites) = if params.core_width == 0 {
        let area = total_sites as f64 * (SITE_WIDTH * ROW_HEIGHT) as f64 / params.utilization;
        let rows = ((area.sqrt() / ROW_HEIGHT as f64).round() as usize).max(1);
        let sites = ((total_sites as f64 / (params.utilization * rows as f64)).ceil() as i64).max(widest);
        (rows, sites)
    } else {
        ((params.core_height / ROW_HEIGHT) as usize, params.core_width / SITE_WIDTH)
    };
    if rows == 0 || sites < widest || total_sites > rows as i64 * sites {
        return Err(DesignError::Capacity(format!(
            "{total_sites} sites of cells do not fit {rows} rows of {sites} sites"
        )));
    }
    let core = Rect {
        lo: Point::new(DIE_MARGIN, DIE_MARGIN),
        hi: Point::new(DIE_MARGIN + sites * SITE_WIDTH, DIE_MARGIN + rows as i64 * ROW_HEIGHT),
    };
    let die = Rect { lo: Point::new(0, 0), hi: Point::new(core.hi.x + DIE_MARGIN, core.hi.y + DIE_MARGIN) };

    let field = Field::new(&core, params.hotspots, &mut rng);
    let slots = place(&kinds, rows, sites, &core, &field)?;

    let w = digits(n);
    let mut instances = Vec::with_capacity(n);
    let mut masters: Vec<&Master> = Vec::with_capacity(n);
    for (i, (&kind, &(row, site))) in kinds.iter().zip(&slots).enumerate() {
        let master = tech.master(kind.spec().name).expect("library master");
        let orient = if row % 2 == 1 { Orient::FS } else { Orient::N };
        instances.push(Instance {
            name: format!("u{i:0w$}"),
            master: master.name.clone(),
            origin: Point::new(core.lo.x + site * SITE_WIDTH, core.lo.y + row as i64 * ROW_HEIGHT),
            orient,
            fixed: false,
            class: classify_instance(&master.name, &tech)?,
        });
        masters.push(master);
    }
    let pin_at = |i: usize, pin: &str| -> Point {
        let m = masters[i];
        let mp = m.pin(pin).expect("library pin");
        let off = instances[i].orient.transform(mp.offset, m.width, m.height);
        Point::new(instances[i].origin.x + off.x, instances[i].origin.y + off.y)
    };
    let center: Vec<Point> = instances
        .iter()
        .zip(&masters)
        .map(|(inst, m)| Point::new(inst.origin.x + m.width / 2, inst.origin.y + m.height / 2))
        .collect();

    // ports
    let auto = ((n as f64).sqrt() / 2.0).round().max(4.0) as usize;
    let n_in = params.num_inputs.unwrap_or(auto);
    let n_out = params.num_outputs.unwrap_or(auto);
    let mut ports = Vec::new();
    let spread = |i: usize, count: usize| core.lo.y + ((2 * i as i64 + 1) * core.height()) / (2 * count.max(1) as i64);
    let wi = digits(n_in.max(n_out));
    for i in 0..n_in {
        ports.push(Port {
            name: format!("in_{i:0wi$}"),
            position: Point::new(die.lo.x, spread(i, n_in)),
            direction: PinDirection::Input,
        });
    }
    for i in 0..n_out {
        ports.push(Port {
            name: format!("out_{i:0wi$}"),
            position: Point::new(die.hi.x, spread(i, n_out)),
            direction: PinDirection::Output,
        });
    }
    let clk_port = (n_dff > 0).then(|| {
        ports.push(Port {
            name: "clk".to_string(),
            position: Point::new((core.lo.x + core.hi.x) / 2, die.lo.y),
            direction: PinDirection::Input,
        });
        ports.len() - 1
    });

    // levels: 0 drives only; comb cells 1..=levels; flip-flops load at levels + 1
    let level: Vec<u32> = kinds
        .iter()
        .map(|k| match k {
            Kind::Comb(_) => rng.gen_range(1..=levels),
            Kind::Dff => levels + 1,
            Kind::ClkBuf => 0,
        })
        .collect();
    let free: Vec<Vec<&'static str>> = kinds
        .iter()
        .map(|k| match k {
            Kind::Comb(_) => k.spec().inputs.iter().rev().copied().collect(),
            Kind::Dff => vec!["D"],
            Kind::ClkBuf => Vec::new(),
        })
        .collect();
    let bx = (die.width() + BIN_SIZE - 1) / BIN_SIZE;
    let by = (die.height() + BIN_SIZE - 1) / BIN_SIZE;
    let mut picker = LoadPicker {
        bins: vec![Vec::new(); (bx * by) as usize],
        bx,
        by,
        origin: die.lo,
        alive: Vec::new(),
        free,
        level: &level,
        center: &center,
    };
    for i in 0..n {
        if !picker.free[i].is_empty() {
            let (x, y) = picker.bin_of(center[i]);
            picker.bins[(y * bx + x) as usize].push(i as u32);
            picker.alive.push(i as u32);
        }
    }

    enum Driver {
        Port(usize),
        Inst(usize),
    }
    let mut drivers: Vec<(u32, Driver)> = (0..n_in).map(|p| (0, Driver::Port(p))).collect();
    let mut inst_drivers: Vec<usize> = (0..n).filter(|&i| kinds[i] != Kind::ClkBuf).collect();
    inst_drivers.shuffle(&mut rng);
    inst_drivers.sort_by_key(|&i| if kinds[i] == Kind::Dff { 0 } else { level[i] });
    drivers.extend(inst_drivers.into_iter().map(|i| (if kinds[i] == Kind::Dff { 0 } else { level[i] }, Driver::Inst(i))));

    let degree_weights =
        WeightedIndex::new(params.pin_distribution.iter().map(|p| p.1)).map_err(|e| DesignError::Invalid(e.to_string()))?;
    let wn = digits(params.num_nets);
    let mut nets: Vec<Net> = Vec::with_capacity(params.num_nets + n_clk + 1);
    for (lvl, drv) in &drivers {
        if nets.len() >= params.num_nets {
            break;
        }
        let k = params.pin_distribution[degree_weights.sample(&mut rng)].0;
        let (from, inst, dpin) = match *drv {
            Driver::Port(p) => (
                ports[p].position,
                None,
                NetPin {
                    owner: PinOwner::Port(ports[p].name.clone()),
                    pin: "PIN".to_string(),
                    position: ports[p].position,
                    role: NetPinRole::Driver,
                },
            ),
            Driver::Inst(i) => {
                let out = kinds[i].spec().output;
                let pos = pin_at(i, out);
                (
                    pos,
                    Some(i),
                    NetPin {
                        owner: PinOwner::Instance(instances[i].name.clone()),
                        pin: out.to_string(),
                        position: pos,
                        role: NetPinRole::Driver,
                    },
                )
            }
        };
        let loads = picker.pick(from, inst, *lvl, k - 1, &mut rng);
        if loads.is_empty() {
            continue;
        }
        let mut pins = vec![dpin];
        for i in loads {
            let pin = picker.free[i].pop().expect("picked instance has a free pin");
            pins.push(NetPin {
                owner: PinOwner::Instance(instances[i].name.clone()),
                pin: pin.to_string(),
                position: pin_at(i, pin),
                role: NetPinRole::Load,
            });
        }
        nets.push(Net { name: format!("n_{:0wn$}", nets.len()), pins, routing: Vec::new(), vias: Vec::new() });
    }
    let signal_nets = nets.len();
    if signal_nets > 0 {
        for port in ports.iter().filter(|p| p.direction == PinDirection::Output) {
            for _ in 0..8 {
                let net = &mut nets[rng.gen_range(0..signal_nets)];
                if net.pins.iter().any(|p| matches!(p.owner, PinOwner::Port(_))) {
                    continue;
                }
                net.pins.push(NetPin {
                    owner: PinOwner::Port(port.name.clone()),
                    pin: "PIN".to_string(),
                    position: port.position,
                    role: NetPinRole::Load,
                });
                break;
            }
        }
    }

    // clock tree: clk -> every CLKBUF, each CLKBUF -> a tile-local group of flip-flops
    if let Some(cp) = clk_port {
        let tile = ((core.area() as f64 * CLOCK_FANOUT as f64 / n_dff as f64).sqrt() as i64).max(1);
        let snake = |i: &usize| {
            let c = center[*i];
            let (tx, ty) = ((c.x - core.lo.x) / tile, (c.y - core.lo.y) / tile);
            (ty, if ty % 2 == 0 { tx } else { -tx }, c.y, c.x, *i)
        };
        let mut dffs: Vec<usize> = (0..n).filter(|&i| kinds[i] == Kind::Dff).collect();
        let mut bufs: Vec<usize> = (0..n).filter(|&i| kinds[i] == Kind::ClkBuf).collect();
        dffs.sort_by_key(snake);
        bufs.sort_by_key(snake);
        let mut root = vec![NetPin {
            owner: PinOwner::Port(ports[cp].name.clone()),
            pin: "PIN".to_string(),
            position: ports[cp].position,
            role: NetPinRole::Driver,
        }];
        let wc = digits(bufs.len());
        for (g, (&b, group)) in bufs.iter().zip(dffs.chunks(CLOCK_FANOUT)).enumerate() {
            root.push(NetPin {
                owner: PinOwner::Instance(instances[b].name.clone()),
                pin: "A".to_string(),
                position: pin_at(b, "A"),
                role: NetPinRole::Load,
            });
            let mut pins = vec![NetPin {
                owner: PinOwner::Instance(instances[b].name.clone()),
                pin: "Z".to_string(),
                position: pin_at(b, "Z"),
                role: NetPinRole::Driver,
            }];
            pins.extend(group.iter().map(|&d| NetPin {
                owner: PinOwner::Instance(instances[d].name.clone()),
                pin: "CK".to_string(),
                position: pin_at(d, "CK"),
                role: NetPinRole::Load,
            }));
            nets.push(Net { name: format!("clkb_{g:0wc$}"), pins, routing: Vec::new(), vias: Vec::new() });
        }
        nets.push(Net { name: "clk".to_string(), pins: root, routing: Vec::new(), vias: Vec::new() });
    }

    for net in &mut nets {
        let (routing, vias) = route_net(&net.pin_points(), params.num_layers, &mut rng);
        net.routing = routing;
        net.vias = vias;
    }
    Design::new(params.name.clone(), tech, die, core, instances, ports, nets)
}
