// SPDX-License-Identifier: Apache-2.0

//! Dataset characteristics: pooled statistics over bundles, correlation
//! matrices, heatmap rendering and the markdown report.

mod heatmap;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engines::percentile;
use crate::vector::Foundation;

pub use heatmap::{feature_map, render_heatmap, Palette, HEATMAP_CHANNELS};
pub use report::{generate_report, write_report, DesignMetrics, ReportFiles, ReportInputs};

#[derive(Debug, Error)]
pub enum InsightError {
    #[error("empty dataset: {0}")]
    EmptyDataset(String),
    #[error("column {0} is constant")]
    ConstantColumn(String),
    #[error("invalid columns: {0}")]
    Columns(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error(transparent)]
    Store(#[from] crate::store::StoreError),
}

/// Five-number summary plus mean; quantiles interpolate linearly between
/// closest ranks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl Quartiles {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        Some(Self {
            count: s.len(),
            min: s[0],
            q1: percentile(&s, 0.25),
            median: percentile(&s, 0.5),
            q3: percentile(&s, 0.75),
            max: s[s.len() - 1],
            mean: s.iter().sum::<f64>() / s.len() as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub designs: Vec<String>,
    /// All nets, routed or not.
    pub num_nets: usize,
    pub num_instances: usize,
    /// Pins per net -> nets, pooled over designs.
    pub pin_histogram: BTreeMap<usize, usize>,
    /// Share of nets with two or three pins.
    pub small_net_share: f64,
    /// Instance class -> share of all instances.
    pub class_shares: BTreeMap<String, f64>,
    /// Routing layer -> share of all routed wirelength; empty without wires.
    pub layer_shares: BTreeMap<u32, f64>,
    /// Per-design instance area over core area.
    pub core_usage: Quartiles,
    /// Seconds, over every extracted path.
    pub path_delay: Option<Quartiles>,
    pub path_stages: Option<Quartiles>,
    /// Pearson coefficient of per-net RWL against HPWL over routed nets;
    /// absent when either is constant.
    pub rwl_hpwl_correlation: Option<f64>,
}

/// Pooled statistics over `bundles`.
pub fn summarize(bundles: &[Foundation]) -> Result<StatSummary, InsightError> {
    if bundles.is_empty() {
        return Err(InsightError::EmptyDataset("no bundles".into()));
    }
    let mut pin_histogram: BTreeMap<usize, usize> = BTreeMap::new();
    let mut class_count: BTreeMap<String, usize> = BTreeMap::new();
    let mut layer_wl: BTreeMap<u32, i64> = BTreeMap::new();
    let (mut delays, mut stages, mut usage) = (Vec::new(), Vec::new(), Vec::new());
    let (mut rwl, mut hpwl) = (Vec::new(), Vec::new());
    for b in bundles {
        for (&k, &v) in &b.design.pin_histogram {
            *pin_histogram.entry(k).or_default() += v;
        }
        for i in &b.layout.instances {
            *class_count.entry(i.class.name().to_string()).or_default() += 1;
        }
        for (&l, &w) in &b.design.layer_wirelength {
            *layer_wl.entry(l).or_default() += w;
        }
        delays.extend(b.paths.iter().map(|p| p.total_delay));
        stages.extend(b.paths.iter().map(|p| p.stage_count as f64));
        usage.push(b.design.core_usage);
        rwl.extend(b.nets.iter().map(|n| n.features.rwl as f64));
        hpwl.extend(b.nets.iter().map(|n| n.features.hpwl as f64));
    }
    let num_nets: usize = pin_histogram.values().sum();
    let num_instances: usize = class_count.values().sum();
    let small: usize = pin_histogram.iter().filter(|(&k, _)| k == 2 || k == 3).map(|(_, v)| v).sum();
    let total_wl: i64 = layer_wl.values().sum();
    Ok(StatSummary {
        designs: bundles.iter().map(|b| b.design.name.clone()).collect(),
        num_nets,
        num_instances,
        small_net_share: if num_nets > 0 { small as f64 / num_nets as f64 } else { 0.0 },
        pin_histogram,
        class_shares: class_count.into_iter().map(|(c, k)| (c, k as f64 / num_instances as f64)).collect(),
        layer_shares: if total_wl > 0 {
            layer_wl.into_iter().map(|(l, w)| (l, w as f64 / total_wl as f64)).collect()
        } else {
            BTreeMap::new()
        },
        core_usage: Quartiles::of(&usage).expect("one value per bundle"),
        path_delay: Quartiles::of(&delays),
        path_stages: Quartiles::of(&stages),
        rwl_hpwl_correlation: if rwl.len() >= 2 { pearson(&rwl, &hpwl).ok() } else { None },
    })
}

/// Symmetric matrix of Pearson coefficients; row `i` belongs to `labels[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl CorrMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[i][j])
    }
}

/// Two-pass Pearson coefficient. Errors name the constant side as `"a"` or `"b"`.
fn pearson(a: &[f64], b: &[f64]) -> Result<f64, &'static str> {
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
        return Err("a");
    }
    if !(sbb > 0.0) {
        return Err("b");
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Pairwise Pearson coefficients of named columns of equal length.
pub fn correlate(columns: &[(String, Vec<f64>)]) -> Result<CorrMatrix, InsightError> {
    if columns.len() < 2 {
        return Err(InsightError::Columns(format!("{} column(s), need at least 2", columns.len())));
    }
    let n = columns[0].1.len();
    if n < 2 {
        return Err(InsightError::Columns(format!("{n} sample(s), need at least 2")));
    }
    if let Some((name, v)) = columns.iter().find(|(_, v)| v.len() != n) {
        return Err(InsightError::Columns(format!("{name} has {} samples, expected {n}", v.len())));
    }
    if let Some((name, _)) = columns.iter().find(|(_, v)| v.iter().any(|x| !x.is_finite())) {
        return Err(InsightError::Columns(format!("{name} holds non-finite values")));
    }
    let k = columns.len();
    let mut values = vec![vec![0.0; k]; k];
    for i in 0..k {
        values[i][i] = 1.0;
        for j in i + 1..k {
            let r = pearson(&columns[i].1, &columns[j].1).map_err(|side| {
                InsightError::ConstantColumn(columns[if side == "a" { i } else { j }].0.clone())
            })?;
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrMatrix { labels: columns.iter().map(|(n, _)| n.clone()).collect(), values })
}

/// Per-net metric columns over routed nets of all bundles.
pub fn net_metric_columns(bundles: &[Foundation]) -> Vec<(String, Vec<f64>)> {
    let nets = || bundles.iter().flat_map(|b| &b.nets);
    let col = |name: &str, f: &dyn Fn(&crate::vector::NetVec) -> f64| (name.to_string(), nets().map(f).collect());
    vec![
        col("fanout", &|n| n.features.fanout as f64),
        col("hpwl", &|n| n.features.hpwl as f64),
        col("rsmt", &|n| n.features.rsmt as f64),
        col("rwl", &|n| n.features.rwl as f64),
        col("via_count", &|n| n.features.via_count as f64),
        col("capacitance", &|n| n.electricals.capacitance),
        col("power", &|n| n.electricals.power),
    ]
}
