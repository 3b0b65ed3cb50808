// SPDX-License-Identifier: Apache-2.0

//! Design-to-vector extraction at five levels: design, net, graph, path and
//! patch.

pub mod elmore;
mod graph;
mod net;
mod patch;
mod path;
pub mod rsmt;
mod stats;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::{Design, Diagnostic, Instance, Net, Port};
use crate::geom::{GcellGrid, GeomError, Rect};

pub use graph::{build_graph, node_id, GraphEdge, GraphNode, GraphVec};
pub use net::{
    decompose_net, net_electricals, pin_capacitance, Electricals, NetFeatures, NetVec, Subnet, SubnetNode,
};
pub use patch::{patch_features, patch_grid, Fragment, PatchVec};
pub use path::{extract_paths, PathLimits, PathNode, PathNodeKind, PathVec};
pub use stats::{extract_design_stats, DesignVec};

#[derive(Debug, Error)]
pub enum VectorError {
    #[error("net {net}: routing does not reach {}", unreached.join(", "))]
    Connectivity { net: String, unreached: Vec<String> },
    #[error("technology error: {0}")]
    Tech(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Switching power `activity * frequency * voltage^2 * C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerModel {
    pub activity: f64,
    /// Hertz.
    pub frequency: f64,
    /// Volt.
    pub voltage: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self { activity: 0.1, frequency: 1e9, voltage: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VectorConfig {
    /// Patch edge in pitches of `reference_layer`.
    pub patch_multiple: u32,
    pub reference_layer: u32,
    pub max_paths: usize,
    pub max_stages: usize,
    /// Seconds.
    pub clock_period: f64,
    pub power: PowerModel,
    pub lness_max_bends: usize,
}

impl Default for VectorConfig {
    fn default() -> Self {
        Self {
            patch_multiple: 9,
            reference_layer: 1,
            max_paths: 2000,
            max_stages: 64,
            clock_period: 1e-9,
            power: PowerModel::default(),
            lness_max_bends: 1,
        }
    }
}

impl VectorConfig {
    /// Rejects values no extraction can use; the error names the field.
    pub fn validate(&self) -> Result<(), VectorError> {
        if self.patch_multiple == 0 {
            return Err(VectorError::Config("patch_multiple".into()));
        }
        if !(self.clock_period.is_finite() && self.clock_period > 0.0) {
            return Err(VectorError::Config("clock_period".into()));
        }
        let p = &self.power;
        if !(p.activity.is_finite() && p.activity >= 0.0) {
            return Err(VectorError::Config("power.activity".into()));
        }
        if !(p.frequency.is_finite() && p.frequency >= 0.0) {
            return Err(VectorError::Config("power.frequency".into()));
        }
        if !(p.voltage.is_finite() && p.voltage >= 0.0) {
            return Err(VectorError::Config("power.voltage".into()));
        }
        Ok(())
    }

    pub fn path_limits(&self) -> PathLimits {
        PathLimits { max_paths: self.max_paths, max_stages: self.max_stages }
    }
}

/// Placement and the pins of nets that carry no geometry; together with the
/// net vectors this is enough to rebuild the design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub name: String,
    pub dbu_per_micron: u32,
    pub die: Rect,
    pub core: Rect,
    pub instances: Vec<Instance>,
    pub ports: Vec<Port>,
    pub unrouted_nets: Vec<Net>,
}

impl Layout {
    pub fn of(design: &Design) -> Self {
        Self {
            name: design.name.clone(),
            dbu_per_micron: design.tech.dbu_per_micron,
            die: design.die,
            core: design.core,
            instances: design.instances.clone(),
            ports: design.ports.clone(),
            unrouted_nets: design.nets.iter().filter(|n| !n.is_routed()).cloned().collect(),
        }
    }
}

/// Everything extracted from one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Foundation {
    pub design: DesignVec,
    pub layout: Layout,
    pub graph: GraphVec,
    /// Routed nets only, in canonical order.
    pub nets: Vec<NetVec>,
    pub paths: Vec<PathVec>,
    pub grid: GcellGrid,
    pub patches: Vec<PatchVec>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Decomposes every net of the design, in canonical order.
pub fn decompose_all(design: &Design, config: &VectorConfig) -> Result<Vec<NetVec>, VectorError> {
    (0..design.nets.len())
        .into_par_iter()
        .map(|i| decompose_net(design, i, &config.power, config.lness_max_bends))
        .collect()
}

/// Runs every extraction on the current rayon pool. Output does not depend
/// on the pool size.
pub fn analyze(design: &Design, config: &VectorConfig) -> Result<Foundation, VectorError> {
    config.validate()?;
    let all = decompose_all(design, config)?;
    let graph = build_graph(design);
    let (paths, mut diagnostics) = extract_paths(design, &all, config.path_limits(), config.clock_period);
    let (grid, patches) = patch_features(design, config.patch_multiple, config.reference_layer, &paths)?;
    let stats = extract_design_stats(design, &all, &paths, &grid, &patches, config.clock_period);
    for n in design.nets.iter().filter(|n| n.driver().is_none()) {
        diagnostics.push(Diagnostic::new(None, format!("net {} has no driver; no graph edges", n.name)));
    }
    let nets = all.into_iter().filter(|n| design.nets[n.index].is_routed()).collect();
    Ok(Foundation { design: stats, layout: Layout::of(design), graph, nets, paths, grid, patches, diagnostics })
}

/// [`analyze`] on a dedicated pool of `threads` workers (0 = rayon default).
pub fn analyze_with_threads(design: &Design, config: &VectorConfig, threads: usize) -> Result<Foundation, VectorError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| VectorError::Config(format!("thread pool: {e}")))?;
    pool.install(|| analyze(design, config))
}
