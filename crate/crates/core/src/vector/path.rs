// SPDX-License-Identifier: Apache-2.0

//! Register-to-register timing paths with per-stage delay decomposition.
//!
//! A stage is one (driver, net) pair. Its delay is the driver's cell delay
//! (`intrinsic + drive_r * net C`, zero for ports) plus the Elmore delay to
//! the load. Paths launch at flip-flop outputs or input ports and capture at
//! flip-flop data pins; clock pins never capture.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::net::NetVec;
use crate::design::{Design, Diagnostic, NetPinRole, PinOwner};
use crate::geom::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathNodeKind {
    CellPin,
    Steiner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathNode {
    pub name: String,
    pub kind: PathNodeKind,
    pub position: Point,
    /// Driver resistance at output pins, wire resistance from the driver elsewhere; ohm.
    pub resistance: f64,
    /// Farad.
    pub capacitance: f64,
    pub slew: f64,
    pub cell_delay: f64,
    pub wire_delay: f64,
    pub incremental_delay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathVec {
    pub launch: String,
    pub capture: String,
    pub nodes: Vec<PathNode>,
    /// Sum of incremental delays, seconds.
    pub total_delay: f64,
    pub stage_count: usize,
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLimits {
    pub max_paths: usize,
    pub max_stages: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum Target {
    Capture,
    Comb(usize),
    Dead,
}

#[derive(Clone, Copy)]
struct Stage {
    net: usize,
    /// Position of the load in the net's load list.
    load: usize,
    delay: f64,
    to: Target,
}

struct Timing {
    /// Outgoing stages per instance, then per port.
    out: Vec<Vec<Stage>>,
    launches: Vec<usize>,
    cell_delay: Vec<f64>,
}

fn build(design: &Design, nets: &[NetVec]) -> Timing {
    let ni = design.instances.len();
    let mut out: Vec<Vec<Stage>> = vec![Vec::new(); ni + design.ports.len()];
    let mut cell_delay = vec![0.0; nets.len()];
    for (n, nv) in nets.iter().enumerate() {
        let Some(driver) = nv.pins.iter().find(|p| p.role == NetPinRole::Driver) else { continue };
        let src = match &driver.owner {
            PinOwner::Instance(name) => {
                let idx = design.instance_index(name).expect("validated owner");
                let m = design.master_of(&design.instances[idx]);
                cell_delay[n] = m.intrinsic_delay + m.drive_resistance * nv.electricals.capacitance;
                idx
            }
            PinOwner::Port(name) => ni + design.port_index(name).expect("validated owner"),
        };
        let loads = nv.load_indices();
        for (k, &pi) in loads.iter().enumerate() {
            let pin = &nv.pins[pi];
            let to = match &pin.owner {
                PinOwner::Instance(name) => {
                    let idx = design.instance_index(name).expect("validated owner");
                    let m = design.master_of(&design.instances[idx]);
                    let clock = m.pin(&pin.pin).is_some_and(|p| p.is_clock);
                    if idx == src || clock {
                        Target::Dead
                    } else if m.is_sequential {
                        Target::Capture
                    } else {
                        Target::Comb(idx)
                    }
                }
                PinOwner::Port(_) => Target::Dead,
            };
            if to != Target::Dead {
                let delay = cell_delay[n] + nv.electricals.delays.get(k).copied().unwrap_or(0.0);
                out[src].push(Stage { net: n, load: k, delay, to });
            }
        }
    }
    let mut launches: Vec<usize> = (0..ni).filter(|&i| design.master_of(&design.instances[i]).is_sequential).collect();
    launches.extend(
        design
            .ports
            .iter()
            .enumerate()
            .filter(|(_, p)| p.direction == crate::design::PinDirection::Input)
            .map(|(k, _)| ni + k),
    );
    Timing { out, launches, cell_delay }
}

/// Longest remaining delay to a capture from each combinational node;
/// back edges found by DFS are cut.
fn longest_remaining(t: &mut Timing, design: &Design, diags: &mut Vec<Diagnostic>) -> Vec<f64> {
    let n = t.out.len();
    let mut best = vec![f64::NEG_INFINITY; n];
    // 0 = white, 1 = on stack, 2 = done
    let mut color = vec![0u8; n];
    let mut cut = 0usize;
    let roots: Vec<usize> = t.launches.clone();
    for root in roots {
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        color[root] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < t.out[v].len() {
                let e = *next;
                *next += 1;
                if let Target::Comb(w) = t.out[v][e].to {
                    match color[w] {
                        0 => {
                            color[w] = 1;
                            stack.push((w, 0));
                        }
                        1 => {
                            t.out[v][e].to = Target::Dead;
                            cut += 1;
                        }
                        _ => {}
                    }
                }
            } else {
                let mut b = f64::NEG_INFINITY;
                for s in &t.out[v] {
                    let rest = match s.to {
                        Target::Capture => 0.0,
                        Target::Comb(w) => best[w],
                        Target::Dead => f64::NEG_INFINITY,
                    };
                    b = b.max(s.delay + rest);
                }
                best[v] = b;
                color[v] = 2;
                stack.pop();
            }
        }
    }
    if cut > 0 {
        diags.push(Diagnostic::new(None, format!("cut {cut} combinational loop edge(s) in {}", design.name)));
    }
    best
}

struct Entry {
    priority: f64,
    seq: usize,
}

impl PartialEq for Entry {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        self.priority.total_cmp(&o.priority).then(o.seq.cmp(&self.seq))
    }
}

struct State {
    parent: Option<usize>,
    from: usize,
    stage: Stage,
    acc: f64,
    stages: usize,
}

/// Extracts up to `max_paths` paths in decreasing delay order.
pub fn extract_paths(
    design: &Design,
    nets: &[NetVec],
    limits: PathLimits,
    clock_period: f64,
) -> (Vec<PathVec>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    if !design.instances.iter().any(|i| design.master_of(i).is_sequential) {
        diags.push(Diagnostic::new(None, format!("{} has no sequential elements; no paths", design.name)));
        return (Vec::new(), diags);
    }
    if limits.max_paths == 0 || limits.max_stages == 0 {
        return (Vec::new(), diags);
    }
    let mut timing = build(design, nets);
    let best = longest_remaining(&mut timing, design, &mut diags);
    let mut arena: Vec<State> = Vec::new();
    let mut heap = BinaryHeap::new();
    let push = |arena: &mut Vec<State>, heap: &mut BinaryHeap<Entry>, st: State| {
        let priority = match st.stage.to {
            Target::Capture => st.acc,
            Target::Comb(w) => st.acc + best[w],
            Target::Dead => return,
        };
        if priority == f64::NEG_INFINITY {
            return;
        }
        arena.push(st);
        heap.push(Entry { priority, seq: arena.len() - 1 });
    };
    for &l in &timing.launches {
        for &s in &timing.out[l] {
            push(&mut arena, &mut heap, State { parent: None, from: l, stage: s, acc: s.delay, stages: 1 });
        }
    }
    let mut found = Vec::new();
    while let Some(Entry { seq, .. }) = heap.pop() {
        let (to, acc, stages) = (arena[seq].stage.to, arena[seq].acc, arena[seq].stages);
        match to {
            Target::Capture => {
                found.push(seq);
                if found.len() >= limits.max_paths {
                    break;
                }
            }
            Target::Comb(w) => {
                if stages < limits.max_stages {
                    for &s in &timing.out[w] {
                        push(
                            &mut arena,
                            &mut heap,
                            State { parent: Some(seq), from: w, stage: s, acc: acc + s.delay, stages: stages + 1 },
                        );
                    }
                }
            }
            Target::Dead => {}
        }
    }
    let paths = found
        .into_iter()
        .map(|seq| {
            let mut chain = Vec::new();
            let mut cur = Some(seq);
            while let Some(c) = cur {
                chain.push((arena[c].from, arena[c].stage));
                cur = arena[c].parent;
            }
            chain.reverse();
            materialize(design, nets, &timing, &chain, clock_period)
        })
        .collect();
    (paths, diags)
}

fn materialize(design: &Design, nets: &[NetVec], t: &Timing, chain: &[(usize, Stage)], clock_period: f64) -> PathVec {
    let ln9 = 9f64.ln();
    let mut nodes = Vec::new();
    for &(from, st) in chain {
        let nv = &nets[st.net];
        let driver = nv.pins.iter().find(|p| p.role == NetPinRole::Driver).expect("timed nets have drivers");
        let drive_r = if from < design.instances.len() {
            design.master_of(&design.instances[from]).drive_resistance
        } else {
            0.0
        };
        let cd = t.cell_delay[st.net];
        nodes.push(PathNode {
            name: driver.label(),
            kind: PathNodeKind::CellPin,
            position: driver.position,
            resistance: drive_r,
            capacitance: nv.electricals.capacitance,
            slew: ln9 * drive_r * nv.electricals.capacitance,
            cell_delay: cd,
            wire_delay: 0.0,
            incremental_delay: cd,
        });
        let pin_idx = nv.load_indices()[st.load];
        let pin = &nv.pins[pin_idx];
        let mut prev = 0.0;
        let mut load_r = 0.0;
        if let Some(sub) = nv.subnets.iter().find(|s| s.load == pin_idx) {
            for sn in sub.nodes.iter().filter(|n| n.steiner) {
                let wd = sn.delay - prev;
                nodes.push(PathNode {
                    name: format!("{}:steiner({},{},{})", nv.name, sn.x, sn.y, sn.layer),
                    kind: PathNodeKind::Steiner,
                    position: Point::new(sn.x, sn.y),
                    resistance: sn.resistance,
                    capacitance: sn.capacitance,
                    slew: ln9 * sn.delay,
                    cell_delay: 0.0,
                    wire_delay: wd,
                    incremental_delay: wd,
                });
                prev = sn.delay;
            }
            load_r = sub.nodes.last().map(|n| n.resistance).unwrap_or(0.0);
        }
        let elmore = nv.electricals.delays[st.load];
        let cap = super::net::pin_capacitance(design, pin);
        nodes.push(PathNode {
            name: pin.label(),
            kind: PathNodeKind::CellPin,
            position: pin.position,
            resistance: load_r,
            capacitance: cap,
            slew: ln9 * elmore,
            cell_delay: 0.0,
            wire_delay: elmore - prev,
            incremental_delay: elmore - prev,
        });
    }
    let total_delay: f64 = nodes.iter().map(|n| n.incremental_delay).sum();
    PathVec {
        launch: nodes.first().map(|n| n.name.clone()).unwrap_or_default(),
        capture: nodes.last().map(|n| n.name.clone()).unwrap_or_default(),
        nodes,
        total_delay,
        stage_count: chain.len(),
        slack: clock_period - total_delay,
    }
}
