// SPDX-License-Identifier: Apache-2.0

//! Per-net table for wirelength-ratio prediction.

use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::design::Diagnostic;
use crate::vector::Foundation;

pub const TABULAR_COLUMNS: [&str; 5] = ["aspect_ratio", "fanout", "hpwl", "rsmt", "l_ness"];
pub const TABULAR_LABELS: [&str; 2] = ["via_count", "rwl_over_rsmt"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularSet {
    pub columns: Vec<String>,
    pub labels: Vec<String>,
    /// Row-major, `rows x columns`.
    pub features: Vec<f64>,
    /// Row-major, `rows x labels`.
    pub targets: Vec<f64>,
    pub rows: usize,
    /// Bundle index of each row.
    pub groups: Vec<usize>,
    /// Net name of each row.
    pub nets: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
}

/// One row per net with a positive RSMT estimate.
pub fn tabular_wirelength(bundles: &[Foundation]) -> Result<TabularSet, EngineError> {
    let mut t = TabularSet {
        columns: TABULAR_COLUMNS.iter().map(|s| s.to_string()).collect(),
        labels: TABULAR_LABELS.iter().map(|s| s.to_string()).collect(),
        features: Vec::new(),
        targets: Vec::new(),
        rows: 0,
        groups: Vec::new(),
        nets: Vec::new(),
        diagnostics: Vec::new(),
    };
    for (g, b) in bundles.iter().enumerate() {
        let mut skipped = 0;
        for n in &b.nets {
            let f = &n.features;
            if f.rsmt <= 0 {
                skipped += 1;
                continue;
            }
            t.features.extend([f.aspect_ratio, f.fanout as f64, f.hpwl as f64, f.rsmt as f64, f.lness]);
            t.targets.extend([f.via_count as f64, f.rwl as f64 / f.rsmt as f64]);
            t.groups.push(g);
            t.nets.push(n.name.clone());
            t.rows += 1;
        }
        if skipped > 0 {
            t.diagnostics.push(Diagnostic::new(None, format!("{}: {skipped} net(s) with zero RSMT excluded", b.design.name)));
        }
    }
    if t.rows == 0 {
        return Err(EngineError::EmptyDataset("no net with positive RSMT".into()));
    }
    Ok(t)
}
