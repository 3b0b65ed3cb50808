// SPDX-License-Identifier: Apache-2.0

//! Design reconstruction from Foundation Data and original-versus-rebuilt
//! comparison of wirelength, timing, power and cell-density maps.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::{Design, DesignError, TechLib};
use crate::geom::{overlap_area, FeatureMap, GcellGrid};
use crate::vector::{analyze, patch_grid, DesignVec, Foundation, VectorConfig, VectorError};

#[derive(Debug, Error)]
pub enum FidelityError {
    #[error("incomplete bundle: {0}")]
    IncompleteBundle(String),
    #[error("designs are not comparable: {0}")]
    IncomparableDesigns(String),
    #[error("correlation undefined: {0} map is constant")]
    ConstantMap(&'static str),
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error(transparent)]
    Design(#[from] DesignError),
}

/// Rebuilds the placed-and-routed design from the layout and net levels.
pub fn reconstruct(bundle: &Foundation, tech: Arc<TechLib>) -> Result<Design, FidelityError> {
    let l = &bundle.layout;
    let d = &bundle.design;
    if l.instances.len() != d.num_instances || l.ports.len() != d.num_ports {
        return Err(FidelityError::IncompleteBundle(format!(
            "layout holds {} instance(s) and {} port(s), design counts {} and {}",
            l.instances.len(),
            l.ports.len(),
            d.num_instances,
            d.num_ports
        )));
    }
    if bundle.nets.len() != d.num_routed_nets || bundle.nets.len() + l.unrouted_nets.len() != d.num_nets {
        return Err(FidelityError::IncompleteBundle(format!(
            "{} routed net file(s) for {} routed net(s)",
            bundle.nets.len(),
            d.num_routed_nets
        )));
    }
    if tech.dbu_per_micron != l.dbu_per_micron {
        return Err(FidelityError::IncomparableDesigns(format!(
            "bundle uses {} DBU per micron, technology {}",
            l.dbu_per_micron, tech.dbu_per_micron
        )));
    }
    let nets = bundle.nets.iter().map(|n| n.to_net()).chain(l.unrouted_nets.iter().cloned()).collect();
    Ok(Design::new(l.name.clone(), tech, l.die, l.core, l.instances.clone(), l.ports.clone(), nets)?)
}

/// Cell area over cell-rectangle area, per grid cell.
pub fn cell_density_map(design: &Design, grid: &GcellGrid) -> FeatureMap {
    let mut m = FeatureMap::zeros(grid.nx, grid.ny);
    let mut covered = vec![0i128; grid.len()];
    for inst in &design.instances {
        let fp = design.footprint(inst);
        let Some((x0, y0, x1, y1)) = grid.cell_span(&fp) else { continue };
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                covered[grid.index(ix, iy)] += overlap_area(&fp, &grid.cell_rect(ix, iy));
            }
        }
    }
    for (k, a) in covered.into_iter().enumerate() {
        let (ix, iy) = grid.coords(k);
        let area = grid.cell_rect(ix, iy).area();
        m.values[k] = if area > 0 { a as f64 / area as f64 } else { 0.0 };
    }
    m
}

/// Area-weighted resampling of `map` on `from` onto the cells of `to`.
pub fn resample(map: &FeatureMap, from: &GcellGrid, to: &GcellGrid) -> FeatureMap {
    if from == to {
        return map.clone();
    }
    let mut out = FeatureMap::zeros(to.nx, to.ny);
    for k in 0..to.len() {
        let (ix, iy) = to.coords(k);
        let r = to.cell_rect(ix, iy);
        let area = r.area();
        let Some((x0, y0, x1, y1)) = from.cell_span(&r).filter(|_| area > 0) else { continue };
        let mut acc = 0.0;
        for jy in y0..=y1 {
            for jx in x0..=x1 {
                acc += map.get(jx, jy) * overlap_area(&r, &from.cell_rect(jx, jy)) as f64;
            }
        }
        out.values[k] = acc / area as f64;
    }
    out
}

/// Pearson correlation with two-pass moments.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64, FidelityError> {
    assert_eq!(a.len(), b.len(), "maps of equal size");
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if !(saa > 0.0) {
        return Err(FidelityError::ConstantMap("original"));
    }
    if !(sbb > 0.0) {
        return Err(FidelityError::ConstantMap("reconstructed"));
    }
    // sqrt(x * x) == x exactly, so identical maps give exactly 1
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Original and reconstructed value of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub original: f64,
    pub reconstructed: f64,
    /// `reconstructed / original`; 1 when both are equal, absent when the
    /// signs differ or only one side is zero.
    pub ratio: Option<f64>,
    pub abs_diff: f64,
}

impl Ratio {
    pub fn of(original: f64, reconstructed: f64) -> Self {
        let ratio = if original == reconstructed {
            Some(1.0)
        } else if original != 0.0 && reconstructed != 0.0 && original.signum() == reconstructed.signum() {
            Some(reconstructed / original)
        } else {
            None
        };
        Self { original, reconstructed, ratio, abs_diff: (reconstructed - original).abs() }
    }

    fn within(&self, tol: f64) -> bool {
        self.ratio.is_some_and(|r| (r - 1.0).abs() <= tol)
    }
}

/// Grid of the density maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityGrid {
    /// The vector patch grid over the die.
    Patch,
    /// Square bin count over the core such that a bin holds this many
    /// instances on average; at least 2 x 2.
    CellsPerBin(usize),
}

impl DensityGrid {
    pub fn grid(self, design: &Design, cfg: &VectorConfig) -> Result<GcellGrid, FidelityError> {
        match self {
            DensityGrid::Patch => Ok(patch_grid(design, cfg.patch_multiple, cfg.reference_layer)?),
            DensityGrid::CellsPerBin(k) => {
                let n = ((design.instances.len() as f64 / k.max(1) as f64).sqrt().floor() as usize).max(2);
                Ok(GcellGrid::with_counts(design.core, n, n).map_err(VectorError::from)?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityOptions {
    pub density_grid: DensityGrid,
    /// Reconstructed density map uses cells this many times larger.
    pub coarsen: u32,
    /// Allowed `|ratio - 1|` for a metric to pass.
    pub ratio_tolerance: f64,
    pub min_correlation: f64,
}

impl Default for FidelityOptions {
    fn default() -> Self {
        Self { density_grid: DensityGrid::CellsPerBin(8), coarsen: 1, ratio_tolerance: 0.05, min_correlation: 0.95 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub design: String,
    pub wirelength: Ratio,
    pub wns: Ratio,
    pub tns: Ratio,
    pub power: Ratio,
    /// Original, reconstructed.
    pub violating_paths: (usize, usize),
    pub density_correlation: f64,
    /// Cells of the original and the reconstructed density map.
    pub density_grids: [(usize, usize); 2],
    pub options: FidelityOptions,
    pub passes: BTreeMap<String, bool>,
}

impl FidelityReport {
    pub fn passed(&self) -> bool {
        self.passes.values().all(|&p| p)
    }
}

/// Both designs go through the same extraction under `cfg`. The density map
/// of the reconstructed design is taken on the coarsened grid and resampled
/// onto the original one before correlating.
pub fn compare(
    original: &Design,
    reconstructed: &Design,
    cfg: &VectorConfig,
    opts: FidelityOptions,
) -> Result<FidelityReport, FidelityError> {
    if original.die != reconstructed.die {
        return Err(FidelityError::IncomparableDesigns("die areas differ".into()));
    }
    if original.tech.dbu_per_micron != reconstructed.tech.dbu_per_micron {
        return Err(FidelityError::IncomparableDesigns("DBU per micron differ".into()));
    }
    let (a, b) = rayon::join(|| analyze(original, cfg), || analyze(reconstructed, cfg));
    compare_stats(original, reconstructed, &a?.design, &b?.design, cfg, opts)
}

fn compare_stats(
    original: &Design,
    reconstructed: &Design,
    a: &DesignVec,
    b: &DesignVec,
    cfg: &VectorConfig,
    opts: FidelityOptions,
) -> Result<FidelityReport, FidelityError> {
    let fine = opts.density_grid.grid(original, cfg)?;
    let coarse = fine.coarsened(opts.coarsen).map_err(VectorError::from)?;
    let map_a = cell_density_map(original, &fine);
    let map_b = resample(&cell_density_map(reconstructed, &coarse), &coarse, &fine);
    let density_correlation = pearson(&map_a.values, &map_b.values)?;
    let wirelength = Ratio::of(a.total_rwl as f64, b.total_rwl as f64);
    let wns = Ratio::of(a.wns, b.wns);
    let tns = Ratio::of(a.tns, b.tns);
    let power = Ratio::of(a.total_power, b.total_power);
    let tol = opts.ratio_tolerance;
    let passes = BTreeMap::from([
        ("wirelength".to_string(), wirelength.within(tol)),
        ("wns".to_string(), wns.within(tol)),
        ("tns".to_string(), tns.within(tol)),
        ("power".to_string(), power.within(tol)),
        ("violating_paths".to_string(), a.violating_paths == b.violating_paths),
        ("density_correlation".to_string(), density_correlation >= opts.min_correlation),
    ]);
    Ok(FidelityReport {
        design: a.name.clone(),
        wirelength,
        wns,
        tns,
        power,
        violating_paths: (a.violating_paths, b.violating_paths),
        density_correlation,
        density_grids: [(fine.nx, fine.ny), (coarse.nx, coarse.ny)],
        options: opts,
        passes,
    })
}
