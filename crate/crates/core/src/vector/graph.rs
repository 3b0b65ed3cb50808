// SPDX-License-Identifier: Apache-2.0

//! Netlist hypergraph to directed graph by star expansion.

use serde::{Deserialize, Serialize};

use crate::design::{Design, NetPinRole, PinOwner};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: usize,
    pub name: String,
    /// Instance class name, or `"port"`.
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub src: usize,
    pub dst: usize,
    pub net: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphVec {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

/// Node id of a pin owner: instances by name first, then ports.
pub fn node_id(design: &Design, owner: &PinOwner) -> Option<usize> {
    match owner {
        PinOwner::Instance(n) => design.instance_index(n),
        PinOwner::Port(n) => design.port_index(n).map(|p| design.instances.len() + p),
    }
}

/// One node per instance and port; one edge driver -> load per load pin.
/// Loads on the driver's own instance are dropped.
pub fn build_graph(design: &Design) -> GraphVec {
    let mut nodes: Vec<GraphNode> = design
        .instances
        .iter()
        .enumerate()
        .map(|(id, i)| GraphNode { id, name: i.name.clone(), class: i.class.name().to_string() })
        .collect();
    let base = nodes.len();
    nodes.extend(
        design
            .ports
            .iter()
            .enumerate()
            .map(|(k, p)| GraphNode { id: base + k, name: p.name.clone(), class: "port".to_string() }),
    );
    let mut edges = Vec::new();
    for net in &design.nets {
        let Some(driver) = net.driver() else { continue };
        let src = node_id(design, &driver.owner).expect("validated owner");
        for load in net.pins.iter().filter(|p| p.role == NetPinRole::Load) {
            let dst = node_id(design, &load.owner).expect("validated owner");
            if dst != src {
                edges.push(GraphEdge { src, dst, net: net.name.clone() });
            }
        }
    }
    GraphVec { nodes, edges }
}
