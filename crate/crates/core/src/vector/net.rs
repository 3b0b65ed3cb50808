// SPDX-License-Identifier: Apache-2.0

//! Net-level vectors: wire/via primitives, driver-to-load subnets and
//! RC electricals.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use super::elmore::RcTree;
use super::rsmt::estimate_rsmt;
use super::{PowerModel, VectorError};
use crate::design::{Design, Net, NetPin, NetPinRole, PinOwner, TechLib};
use crate::geom::{hpwl, Point, Rect, ViaInstance, WireSegment};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetFeatures {
    pub fanout: usize,
    /// `min(w, h) / max(w, h)` of the pin bounding box; 1 for a point.
    pub aspect_ratio: f64,
    pub hpwl: i64,
    pub rsmt: i64,
    /// Share of subnets with at most `lness_max_bends` bends.
    pub lness: f64,
    pub rwl: i64,
    pub via_count: usize,
    pub layer_wirelength: BTreeMap<u32, i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Electricals {
    /// Sum over all wires and vias, ohm.
    pub resistance: f64,
    /// Wire plus load-pin capacitance, farad.
    pub capacitance: f64,
    pub wire_capacitance: f64,
    pub pin_capacitance: f64,
    /// Elmore delay per load, in load order, seconds.
    pub delays: Vec<f64>,
    /// `ln 9 * Elmore` per load, seconds.
    pub slews: Vec<f64>,
    /// Switching power, watt.
    pub power: f64,
}

/// A critical point on a driver-to-load walk with its electrical state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubnetNode {
    pub x: i64,
    pub y: i64,
    pub layer: u32,
    /// Resistance from the driver, ohm.
    pub resistance: f64,
    /// Downstream capacitance, farad.
    pub capacitance: f64,
    /// Elmore delay from the driver, seconds.
    pub delay: f64,
    /// Branching point of the routing tree.
    pub steiner: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subnet {
    /// Index of the load in `NetVec::pins`.
    pub load: usize,
    pub bends: usize,
    pub nodes: Vec<SubnetNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetVec {
    pub name: String,
    /// Index of the net in the design's canonical net order.
    pub index: usize,
    pub pins: Vec<NetPin>,
    pub bbox: Rect,
    pub features: NetFeatures,
    pub electricals: Electricals,
    pub wires: Vec<WireSegment>,
    pub vias: Vec<ViaInstance>,
    pub subnets: Vec<Subnet>,
}

impl NetVec {
    /// Load pin indices in pin order; `electricals.delays` follows it.
    pub fn load_indices(&self) -> Vec<usize> {
        (0..self.pins.len()).filter(|&i| self.pins[i].role == NetPinRole::Load).collect()
    }

    /// Rebuilds the design net (pins and geometry).
    pub fn to_net(&self) -> Net {
        Net { name: self.name.clone(), pins: self.pins.clone(), routing: self.wires.clone(), vias: self.vias.clone() }
    }
}

#[derive(Clone, Copy)]
enum EdgeKind {
    Wire { layer: u32, len: i64 },
    Via { bot: u32, top: u32 },
}

/// Routing graph over `(layer, x, y)` nodes with segments split at every
/// same-layer point of interest that lies on them.
struct RouteGraph {
    nodes: Vec<(u32, Point)>,
    edges: Vec<(usize, usize, EdgeKind)>,
    adj: Vec<Vec<usize>>,
}

impl RouteGraph {
    fn build(wires: &[WireSegment], vias: &[ViaInstance], extra: &[Point]) -> Self {
        let mut ids: HashMap<(u32, i64, i64), usize> = HashMap::new();
        let mut nodes = Vec::new();
        let mut node = |l: u32, p: Point, nodes: &mut Vec<(u32, Point)>| -> usize {
            *ids.entry((l, p.x, p.y)).or_insert_with(|| {
                nodes.push((l, p));
                nodes.len() - 1
            })
        };
        // points of interest per layer: on rows (y -> xs) and columns (x -> ys)
        let mut rows: HashMap<(u32, i64), Vec<i64>> = HashMap::new();
        let mut cols: HashMap<(u32, i64), Vec<i64>> = HashMap::new();
        let mut mark = |l: u32, p: Point| {
            rows.entry((l, p.y)).or_default().push(p.x);
            cols.entry((l, p.x)).or_default().push(p.y);
        };
        let mut layers: Vec<u32> = wires.iter().map(|w| w.layer).collect();
        layers.sort_unstable();
        layers.dedup();
        for w in wires {
            mark(w.layer, w.start());
            mark(w.layer, w.end());
        }
        for v in vias {
            mark(v.layer_bot, v.at());
            mark(v.layer_top, v.at());
        }
        for &p in extra {
            for &l in &layers {
                mark(l, p);
            }
        }
        for v in rows.values_mut().chain(cols.values_mut()) {
            v.sort_unstable();
            v.dedup();
        }
        let mut edges = Vec::new();
        for w in wires {
            if w.length() == 0 {
                node(w.layer, w.start(), &mut nodes);
                continue;
            }
            let horizontal = w.ys == w.ye;
            let (fixed, lo, hi) = if horizontal {
                (w.ys, w.xs.min(w.xe), w.xs.max(w.xe))
            } else {
                (w.xs, w.ys.min(w.ye), w.ys.max(w.ye))
            };
            let line = if horizontal { &rows[&(w.layer, fixed)] } else { &cols[&(w.layer, fixed)] };
            let start = line.partition_point(|&v| v < lo);
            let end = line.partition_point(|&v| v <= hi);
            let at = |v: i64| if horizontal { Point::new(v, fixed) } else { Point::new(fixed, v) };
            for k in start..end - 1 {
                let a = node(w.layer, at(line[k]), &mut nodes);
                let b = node(w.layer, at(line[k + 1]), &mut nodes);
                edges.push((a, b, EdgeKind::Wire { layer: w.layer, len: line[k + 1] - line[k] }));
            }
        }
        for v in vias {
            let a = node(v.layer_bot, v.at(), &mut nodes);
            let b = node(v.layer_top, v.at(), &mut nodes);
            edges.push((a, b, EdgeKind::Via { bot: v.layer_bot, top: v.layer_top }));
        }
        let mut adj = vec![Vec::new(); nodes.len()];
        for (e, &(a, b, _)) in edges.iter().enumerate() {
            adj[a].push(e);
            adj[b].push(e);
        }
        Self { nodes, edges, adj }
    }

    /// Node for a pin: inside `shape`, lowest layer first, then nearest.
    fn attach(&self, shape: &Rect, at: Point) -> Option<usize> {
        (0..self.nodes.len())
            .filter(|&i| shape.contains(self.nodes[i].1))
            .min_by_key(|&i| {
                let (l, p) = self.nodes[i];
                (l, p.manhattan(at), p.x, p.y)
            })
    }

    /// Shortest-path tree by wire length: `(order, parent edge)`.
    fn dijkstra(&self, root: usize) -> (Vec<usize>, Vec<Option<usize>>) {
        let n = self.nodes.len();
        let mut dist = vec![i64::MAX; n];
        let mut parent = vec![None; n];
        let mut done = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut heap = BinaryHeap::new();
        dist[root] = 0;
        heap.push(Reverse((0i64, root)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            order.push(u);
            for &e in &self.adj[u] {
                let (a, b, kind) = self.edges[e];
                let v = if a == u { b } else { a };
                let w = match kind {
                    EdgeKind::Wire { len, .. } => len,
                    EdgeKind::Via { .. } => 0,
                };
                if !done[v] && d + w < dist[v] {
                    dist[v] = d + w;
                    parent[v] = Some(e);
                    heap.push(Reverse((dist[v], v)));
                }
            }
        }
        (order, parent)
    }
}

fn layer_rc(tech: &TechLib, layer: u32) -> Result<(f64, f64), VectorError> {
    let l = tech.layer(layer).ok_or_else(|| VectorError::Tech(format!("unknown layer {layer}")))?;
    if l.unit_r == 0.0 && l.unit_c == 0.0 {
        return Err(VectorError::Tech(format!("layer {} has no unit R/C", l.name)));
    }
    Ok((l.unit_r, l.unit_c))
}

fn count_bends(points: &[Point]) -> usize {
    let mut dirs = Vec::with_capacity(points.len());
    for w in points.windows(2) {
        if w[0] != w[1] {
            dirs.push(w[0].y == w[1].y);
        }
    }
    dirs.windows(2).filter(|d| d[0] != d[1]).count()
}

/// Input capacitance of a net pin; ports have none.
pub fn pin_capacitance(design: &Design, pin: &NetPin) -> f64 {
    match &pin.owner {
        PinOwner::Instance(i) => design
            .instance(i)
            .and_then(|inst| design.master_of(inst).pin(&pin.pin))
            .map(|p| p.capacitance)
            .unwrap_or(0.0),
        PinOwner::Port(_) => 0.0,
    }
}

fn pin_shape(design: &Design, pin: &NetPin) -> Rect {
    match &pin.owner {
        PinOwner::Instance(i) => {
            let inst = design.instance(i).expect("validated pin owner");
            let mp = design.master_of(inst).pin(&pin.pin).expect("validated pin");
            let s = design.pin_shape(inst, mp);
            // the reference point always counts as on the pin
            Rect::bounding([s.lo, s.hi, pin.position]).expect("non-empty")
        }
        PinOwner::Port(_) => Rect { lo: pin.position, hi: pin.position },
    }
}

/// Decomposes net `index` of `design` into primitives, driver-to-load
/// subnets and electricals.
pub fn decompose_net(
    design: &Design,
    index: usize,
    power: &PowerModel,
    lness_max_bends: usize,
) -> Result<NetVec, VectorError> {
    let net = &design.nets[index];
    let tech = &design.tech;
    let points = net.pin_points();
    let bbox = Rect::bounding(points.iter().copied()).expect("validated nets have pins");
    let loads: Vec<usize> = (0..net.pins.len()).filter(|&i| net.pins[i].role == NetPinRole::Load).collect();
    let caps: Vec<f64> = net.pins.iter().map(|p| pin_capacitance(design, p)).collect();
    let pin_c: f64 = loads.iter().map(|&i| caps[i]).sum();

    let mut layer_wl: BTreeMap<u32, i64> = BTreeMap::new();
    let mut resistance = 0.0;
    let mut wire_c = 0.0;
    for w in &net.routing {
        *layer_wl.entry(w.layer).or_default() += w.length();
        let (r, c) = layer_rc(tech, w.layer)?;
        resistance += r * w.length() as f64;
        wire_c += c * w.length() as f64;
    }
    let via_r = |bot: u32, top: u32| tech.via_def(bot, top).map(|v| v.resistance).unwrap_or(0.0);
    for v in &net.vias {
        resistance += via_r(v.layer_bot, v.layer_top);
    }

    let mut delays = vec![0.0; loads.len()];
    let mut subnets = Vec::new();
    if net.is_routed() {
        let graph = RouteGraph::build(&net.routing, &net.vias, &points);
        let attach: Vec<Option<usize>> =
            net.pins.iter().map(|p| graph.attach(&pin_shape(design, p), p.position)).collect();
        let driver = net.pins.iter().position(|p| p.role == NetPinRole::Driver).unwrap_or(0);
        let unreached_of = |reached: &dyn Fn(usize) -> bool| -> Vec<String> {
            net.pins
                .iter()
                .zip(&attach)
                .filter(|(_, a)| a.is_none_or(|n| !reached(n)))
                .map(|(p, _)| p.label())
                .collect()
        };
        let Some(root) = attach[driver] else {
            return Err(VectorError::Connectivity { net: net.name.clone(), unreached: unreached_of(&|_| false) });
        };
        let (order, parent) = graph.dijkstra(root);
        let reached = |n: usize| n == root || parent[n].is_some();
        let unreached = unreached_of(&reached);
        if !unreached.is_empty() {
            return Err(VectorError::Connectivity { net: net.name.clone(), unreached });
        }

        // RC tree in Dijkstra order; wire C split half to each end
        let mut tree_idx = vec![usize::MAX; graph.nodes.len()];
        let mut node_c = vec![0.0; graph.nodes.len()];
        for &(a, b, kind) in &graph.edges {
            if let EdgeKind::Wire { layer, len } = kind {
                let c = layer_rc(tech, layer)?.1 * len as f64;
                node_c[a] += c / 2.0;
                node_c[b] += c / 2.0;
            }
        }
        for &i in &loads {
            node_c[attach[i].expect("reached")] += caps[i];
        }
        let mut tree = RcTree::new(node_c[root]);
        tree_idx[root] = 0;
        let mut tree_node = vec![root];
        let mut child_count = vec![0usize; graph.nodes.len()];
        for &u in order.iter().skip(1) {
            let e = parent[u].expect("non-root has a parent");
            let (a, b, kind) = graph.edges[e];
            let p = if a == u { b } else { a };
            let r = match kind {
                EdgeKind::Wire { layer, len } => layer_rc(tech, layer)?.0 * len as f64,
                EdgeKind::Via { bot, top } => via_r(bot, top),
            };
            child_count[p] += 1;
            tree_idx[u] = tree.add_node(tree_idx[p], r, node_c[u]);
            tree_node.push(u);
        }
        let elmore = tree.elmore_delays();
        let down = tree.downstream_capacitance();
        let path_r = tree.path_resistance();
        for (k, &i) in loads.iter().enumerate() {
            let target = attach[i].expect("reached");
            delays[k] = elmore[tree_idx[target]];
            let mut walk = vec![target];
            let mut cur = target;
            while let Some(e) = parent[cur] {
                let (a, b, _) = graph.edges[e];
                cur = if a == cur { b } else { a };
                walk.push(cur);
            }
            walk.reverse();
            let xy: Vec<Point> = walk.iter().map(|&n| graph.nodes[n].1).collect();
            let mut nodes = Vec::new();
            for j in 0..walk.len() {
                let (l, p) = graph.nodes[walk[j]];
                let branch = child_count[walk[j]] >= 2;
                let keep = j == 0
                    || j + 1 == walk.len()
                    || branch
                    || graph.nodes[walk[j - 1]].0 != l
                    || graph.nodes[walk[j + 1]].0 != l
                    || !((xy[j - 1].x == p.x && p.x == xy[j + 1].x) || (xy[j - 1].y == p.y && p.y == xy[j + 1].y));
                if keep {
                    let t = tree_idx[walk[j]];
                    nodes.push(SubnetNode {
                        x: p.x,
                        y: p.y,
                        layer: l,
                        resistance: path_r[t],
                        capacitance: down[t],
                        delay: elmore[t],
                        steiner: branch && j != 0 && j + 1 != walk.len(),
                    });
                }
            }
            subnets.push(Subnet { load: i, bends: count_bends(&xy), nodes });
        }
    }
    let lness = if subnets.is_empty() {
        0.0
    } else {
        subnets.iter().filter(|s| s.bends <= lness_max_bends).count() as f64 / subnets.len() as f64
    };
    let capacitance = wire_c + pin_c;
    let (w, h) = (bbox.width(), bbox.height());
    let aspect_ratio = if w.max(h) == 0 { 1.0 } else { w.min(h) as f64 / w.max(h) as f64 };
    Ok(NetVec {
        name: net.name.clone(),
        index,
        pins: net.pins.clone(),
        bbox,
        features: NetFeatures {
            fanout: loads.len(),
            aspect_ratio,
            hpwl: hpwl(&points)?,
            rsmt: estimate_rsmt(&points),
            lness,
            rwl: net.routed_length(),
            via_count: net.vias.len(),
            layer_wirelength: layer_wl,
        },
        electricals: Electricals {
            resistance,
            capacitance,
            wire_capacitance: wire_c,
            pin_capacitance: pin_c,
            slews: delays.iter().map(|d| d * 9f64.ln()).collect(),
            delays,
            power: power.activity * power.frequency * power.voltage * power.voltage * capacitance,
        },
        wires: net.routing.clone(),
        vias: net.vias.clone(),
        subnets,
    })
}

/// Electricals of one net; see [`decompose_net`].
pub fn net_electricals(design: &Design, index: usize, power: &PowerModel) -> Result<Electricals, VectorError> {
    Ok(decompose_net(design, index, power, 1)?.electricals)
}
