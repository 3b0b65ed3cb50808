// SPDX-License-Identifier: Apache-2.0

//! Design-level statistics and timing/power summary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::net::NetVec;
use super::patch::PatchVec;
use super::path::PathVec;
use crate::design::{Design, InstanceClass};
use crate::geom::{GcellGrid, Rect};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignVec {
    pub name: String,
    pub dbu_per_micron: u32,
    pub die: Rect,
    pub core: Rect,
    pub num_instances: usize,
    pub num_ports: usize,
    pub num_nets: usize,
    pub num_routed_nets: usize,
    pub num_wires: usize,
    pub num_vias: usize,
    pub num_pins: usize,
    /// Instance area over core area.
    pub core_usage: f64,
    pub class_shares: BTreeMap<String, f64>,
    /// Pins per net -> number of nets.
    pub pin_histogram: BTreeMap<usize, usize>,
    pub layer_wirelength: BTreeMap<u32, i64>,
    pub total_rwl: i64,
    pub total_hpwl: i64,
    pub total_rsmt: i64,
    /// Minimum path slack; 0 without paths.
    pub wns: f64,
    /// Sum of negative path slacks.
    pub tns: f64,
    pub violating_paths: usize,
    pub num_paths: usize,
    /// Watt.
    pub total_power: f64,
    pub clock_period: f64,
    /// Patches with some layer above capacity.
    pub overflow_patches: usize,
    pub grid: GcellGrid,
}

/// `nets` must hold every net of the design in canonical order.
pub fn extract_design_stats(
    design: &Design,
    nets: &[NetVec],
    paths: &[PathVec],
    grid: &GcellGrid,
    patches: &[PatchVec],
    clock_period: f64,
) -> DesignVec {
    let inst_area: i128 = design.instances.iter().map(|i| design.footprint(i).area()).sum();
    let core_area = design.core.area();
    let mut class_count: BTreeMap<InstanceClass, usize> = BTreeMap::new();
    for i in &design.instances {
        *class_count.entry(i.class).or_default() += 1;
    }
    let total = design.instances.len().max(1) as f64;
    let class_shares = class_count.into_iter().map(|(c, k)| (c.name().to_string(), k as f64 / total)).collect();
    let mut pin_histogram = BTreeMap::new();
    let mut layer_wirelength = BTreeMap::new();
    for n in nets {
        *pin_histogram.entry(n.pins.len()).or_default() += 1;
        for (&l, &wl) in &n.features.layer_wirelength {
            *layer_wirelength.entry(l).or_default() += wl;
        }
    }
    let slacks = paths.iter().map(|p| p.slack);
    DesignVec {
        name: design.name.clone(),
        dbu_per_micron: design.tech.dbu_per_micron,
        die: design.die,
        core: design.core,
        num_instances: design.instances.len(),
        num_ports: design.ports.len(),
        num_nets: design.nets.len(),
        num_routed_nets: design.nets.iter().filter(|n| n.is_routed()).count(),
        num_wires: design.nets.iter().map(|n| n.routing.len()).sum(),
        num_vias: design.nets.iter().map(|n| n.vias.len()).sum(),
        num_pins: design.pin_count(),
        core_usage: if core_area > 0 { inst_area as f64 / core_area as f64 } else { 0.0 },
        class_shares,
        pin_histogram,
        layer_wirelength,
        total_rwl: nets.iter().map(|n| n.features.rwl).sum(),
        total_hpwl: nets.iter().map(|n| n.features.hpwl).sum(),
        total_rsmt: nets.iter().map(|n| n.features.rsmt).sum(),
        wns: slacks.clone().fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.min(s)))).unwrap_or(0.0),
        tns: slacks.clone().filter(|&s| s < 0.0).fold(0.0, |a, s| a + s),
        violating_paths: slacks.filter(|&s| s < 0.0).count(),
        num_paths: paths.len(),
        total_power: nets.iter().map(|n| n.electricals.power).sum(),
        clock_period,
        overflow_patches: patches.iter().filter(|p| p.max_congestion > 1.0).count(),
        grid: *grid,
    }
}
