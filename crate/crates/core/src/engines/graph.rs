// SPDX-License-Identifier: Apache-2.0

//! Critical-path subgraphs batched into one node matrix with offsets.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::design::Diagnostic;
use crate::geom::Point;
use crate::vector::{Foundation, PathNodeKind};

pub const NODE_CLASSES: [&str; 5] = ["clock", "logic", "macro", "iopad", "port"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSet {
    pub feature_names: Vec<String>,
    /// `num_nodes x features`.
    pub node_features: Vec<f64>,
    pub num_nodes: usize,
    /// Node range of graph `g` is `node_offsets[g]..node_offsets[g + 1]`.
    pub node_offsets: Vec<usize>,
    /// Global node indices.
    pub edges: Vec<[usize; 2]>,
    pub edge_offsets: Vec<usize>,
    /// Per-design normalized `ln(1 + arrival / 1 ps)`.
    pub targets: Vec<f64>,
    /// Bundle index of each graph.
    pub groups: Vec<usize>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Default)]
struct NodeAcc {
    position: Option<Point>,
    capacitance: f64,
    slew: f64,
    arrival: f64,
}

/// One graph per bundle: instances and ports on extracted paths, with the
/// netlist edges among them.
pub fn graph_batch(bundles: &[Foundation]) -> GraphSet {
    let mut feature_names: Vec<String> = ["x", "y", "capacitance", "slew"].iter().map(|s| s.to_string()).collect();
    feature_names.extend(NODE_CLASSES.iter().map(|c| format!("class_{c}")));
    let mut set = GraphSet {
        feature_names,
        node_features: Vec::new(),
        num_nodes: 0,
        node_offsets: vec![0],
        edges: Vec::new(),
        edge_offsets: vec![0],
        targets: Vec::new(),
        groups: Vec::new(),
        diagnostics: Vec::new(),
    };
    for (g, b) in bundles.iter().enumerate() {
        let ids: HashMap<&str, usize> = b.graph.nodes.iter().map(|n| (n.name.as_str(), n.id)).collect();
        let owner = |name: &str| -> Option<usize> {
            name.rsplit_once('/').and_then(|(o, _)| ids.get(o).copied()).or_else(|| ids.get(name).copied())
        };
        let mut acc: BTreeMap<usize, NodeAcc> = BTreeMap::new();
        for p in &b.paths {
            let mut t = 0.0;
            for n in &p.nodes {
                t += n.incremental_delay;
                if n.kind != PathNodeKind::CellPin {
                    continue;
                }
                let Some(id) = owner(&n.name) else { continue };
                let a = acc.entry(id).or_default();
                a.position.get_or_insert(n.position);
                a.capacitance = a.capacitance.max(n.capacitance);
                a.slew = a.slew.max(n.slew);
                a.arrival = a.arrival.max(t);
            }
        }
        if acc.is_empty() {
            set.diagnostics.push(Diagnostic::new(None, format!("{}: no path nodes; graph skipped", b.design.name)));
            continue;
        }
        let base = set.num_nodes;
        let local: HashMap<usize, usize> = acc.keys().enumerate().map(|(k, &id)| (id, base + k)).collect();
        let logs: Vec<f64> = acc.values().map(|a| (a.arrival / 1e-12).ln_1p()).collect();
        let n = logs.len() as f64;
        let mean = logs.iter().sum::<f64>() / n;
        let sd = (logs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
        if sd == 0.0 {
            set.diagnostics.push(Diagnostic::new(None, format!("{}: constant delay targets set to 0", b.design.name)));
        }
        for ((&id, a), l) in acc.iter().zip(&logs) {
            let pos = a.position.expect("set on insert");
            set.node_features.extend([pos.x as f64, pos.y as f64, a.capacitance, a.slew]);
            let class = &b.graph.nodes[id].class;
            set.node_features.extend(NODE_CLASSES.iter().map(|c| if c == class { 1.0 } else { 0.0 }));
            set.targets.push(if sd > 0.0 { (l - mean) / sd } else { 0.0 });
        }
        let edges: BTreeSet<[usize; 2]> = b
            .graph
            .edges
            .iter()
            .filter_map(|e| Some([*local.get(&e.src)?, *local.get(&e.dst)?]))
            .collect();
        set.edges.extend(edges);
        set.num_nodes += acc.len();
        set.node_offsets.push(set.num_nodes);
        set.edge_offsets.push(set.edges.len());
        set.groups.push(g);
    }
    set
}
