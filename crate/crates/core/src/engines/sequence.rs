// SPDX-License-Identifier: Apache-2.0

//! Padded per-path stage sequences.

use serde::{Deserialize, Serialize};

use super::{fit, EngineError, Normalization};
use crate::design::Diagnostic;
use crate::vector::Foundation;

pub const SEQUENCE_FEATURES: [&str; 4] = ["resistance", "capacitance", "slew", "incremental_delay"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub name: String,
    pub center: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSet {
    /// Kept features; constant ones are dropped.
    pub features: Vec<String>,
    pub max_len: usize,
    pub samples: usize,
    /// `samples x max_len x features`, normalized; padding is 0.
    pub tensor: Vec<f64>,
    /// `samples x max_len`, 1 on real positions.
    pub mask: Vec<f64>,
    pub lengths: Vec<usize>,
    pub stats: Vec<FeatureStats>,
    pub groups: Vec<usize>,
    /// Path total delay, seconds.
    pub targets: Vec<f64>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Pads or truncates (keeping the launch side) each path to `max_len` nodes.
pub fn sequence_paths(bundles: &[Foundation], max_len: usize, how: Normalization) -> Result<SequenceSet, EngineError> {
    if max_len < 1 {
        return Err(EngineError::Config("max_len".into()));
    }
    let mut raw: Vec<[f64; 4]> = Vec::new();
    let (mut lengths, mut groups, mut targets, mut starts) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (g, b) in bundles.iter().enumerate() {
        for p in &b.paths {
            starts.push(raw.len());
            let kept = p.nodes.len().min(max_len);
            raw.extend(p.nodes[..kept].iter().map(|n| [n.resistance, n.capacitance, n.slew, n.incremental_delay]));
            lengths.push(p.nodes.len());
            groups.push(g);
            targets.push(p.total_delay);
        }
    }
    if lengths.is_empty() {
        return Err(EngineError::EmptyDataset("no paths".into()));
    }
    let mut diagnostics = Vec::new();
    let mut stats = Vec::new();
    let mut kept_idx = Vec::new();
    for (k, name) in SEQUENCE_FEATURES.iter().enumerate() {
        let col: Vec<f64> = raw.iter().map(|r| r[k]).collect();
        match fit(&col, how) {
            Some((center, scale)) => {
                kept_idx.push(k);
                stats.push(FeatureStats { name: name.to_string(), center, scale });
            }
            None => diagnostics.push(Diagnostic::new(None, format!("feature {name} is constant; dropped"))),
        }
    }
    let f = kept_idx.len();
    let n = lengths.len();
    let mut tensor = vec![0.0; n * max_len * f];
    let mut mask = vec![0.0; n * max_len];
    for i in 0..n {
        let len = lengths[i].min(max_len);
        for t in 0..len {
            let r = raw[starts[i] + t];
            mask[i * max_len + t] = 1.0;
            for (j, (&k, s)) in kept_idx.iter().zip(&stats).enumerate() {
                tensor[(i * max_len + t) * f + j] = (r[k] - s.center) / s.scale;
            }
        }
    }
    Ok(SequenceSet {
        features: stats.iter().map(|s| s.name.clone()).collect(),
        max_len,
        samples: n,
        tensor,
        mask,
        lengths,
        stats,
        groups,
        targets,
        diagnostics,
    })
}

/// Inverse of the normalization for one value of feature `j`.
pub fn denormalize(set: &SequenceSet, j: usize, v: f64) -> f64 {
    v * set.stats[j].scale + set.stats[j].center
}
