// SPDX-License-Identifier: Apache-2.0

//! Writes every dataset of a bundle set as NPY tensors and CSV tables under
//! one directory, described by `dataset.json`.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    graph_batch, routing_mask, sequence_paths, spatial_congestion, split_stratified, tabular_wirelength, EngineConfig,
    EngineError, FeatureStats, SpatialSet, Split,
};
use crate::design::Diagnostic;
use crate::store::{csv_bytes, fnv1a, json, mkdirs, write, write_npy, NpyElement};
use crate::vector::Foundation;

pub const DATASET_MANIFEST: &str = "dataset.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub file: String,
    pub dtype: String,
    pub shape: Vec<usize>,
    /// FNV-1a of the file bytes, 16 hex digits.
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub config: EngineConfig,
    /// Design names in bundle order; `groups` tensors index this list.
    pub designs: Vec<String>,
    /// Indices into `designs` per split.
    pub splits: BTreeMap<String, Vec<usize>>,
    pub tensors: Vec<TensorEntry>,
    pub tables: Vec<String>,
    /// Sample counts per dataset.
    pub counts: BTreeMap<String, usize>,
    pub sequence_stats: Vec<FeatureStats>,
    pub channels: BTreeMap<String, Vec<String>>,
    pub diagnostics: Vec<Diagnostic>,
}

struct Emitter<'a> {
    dir: &'a Path,
    tensors: Vec<TensorEntry>,
}

impl Emitter<'_> {
    fn npy<T: NpyElement>(&mut self, file: &str, values: &[T], shape: &[usize]) -> Result<(), EngineError> {
        let bytes = write_npy(values, shape)?;
        write(&self.dir.join(file), &bytes)?;
        self.tensors.push(TensorEntry {
            file: file.to_string(),
            dtype: T::DESCR.to_string(),
            shape: shape.to_vec(),
            hash: format!("{:016x}", fnv1a(&bytes)),
        });
        Ok(())
    }

    fn groups(&mut self, file: &str, groups: &[usize]) -> Result<(), EngineError> {
        let g: Vec<i64> = groups.iter().map(|&g| g as i64).collect();
        self.npy(file, &g, &[g.len()])
    }

    fn spatial(&mut self, prefix: &str, s: &SpatialSet) -> Result<(), EngineError> {
        let [n, c, h, w] = s.shape();
        self.npy(&format!("{prefix}_x.npy"), &s.inputs, &[n, c, h, w])?;
        self.npy(&format!("{prefix}_y.npy"), &s.labels, &[n, 1, h, w])?;
        self.groups(&format!("{prefix}_groups.npy"), &s.groups)
    }
}

fn note(diags: &mut Vec<Diagnostic>, what: &str, e: &EngineError) {
    diags.push(Diagnostic::new(None, format!("{what} skipped: {e}")));
}

/// Builds all datasets from `bundles` (one per design) and writes them to
/// `dir`. A dataset that cannot be built is skipped with a diagnostic; the
/// call fails only on I/O errors or when no dataset has samples.
pub fn emit_datasets(bundles: &[Foundation], cfg: &EngineConfig, dir: &Path) -> Result<DatasetManifest, EngineError> {
    cfg.validate()?;
    if bundles.is_empty() {
        return Err(EngineError::EmptyDataset("no bundles".into()));
    }
    mkdirs(dir)?;
    let mut out = Emitter { dir, tensors: Vec::new() };
    let mut diags = Vec::new();
    let mut counts = BTreeMap::new();
    let mut channels = BTreeMap::new();
    let mut tables = Vec::new();
    let designs: Vec<String> = bundles.iter().map(|b| b.design.name.clone()).collect();

    match tabular_wirelength(bundles) {
        Ok(t) => {
            let cols = t.columns.len();
            out.npy("tabular_x.npy", &t.features, &[t.rows, cols])?;
            out.npy("tabular_y.npy", &t.targets, &[t.rows, t.labels.len()])?;
            out.groups("tabular_groups.npy", &t.groups)?;
            let mut header = vec!["design".to_string(), "net".to_string()];
            header.extend(t.columns.iter().chain(&t.labels).cloned());
            let rows: Vec<Vec<String>> = (0..t.rows)
                .map(|r| {
                    let mut row = vec![designs[t.groups[r]].clone(), t.nets[r].clone()];
                    row.extend(t.features[r * cols..(r + 1) * cols].iter().map(f64::to_string));
                    row.extend(t.targets[r * t.labels.len()..(r + 1) * t.labels.len()].iter().map(f64::to_string));
                    row
                })
                .collect();
            write(&dir.join("tabular.csv"), &csv_bytes(&header, &rows)?)?;
            tables.push("tabular.csv".to_string());
            counts.insert("tabular".to_string(), t.rows);
            channels.insert("tabular".to_string(), header[2..].to_vec());
            diags.extend(t.diagnostics);
        }
        Err(e) => note(&mut diags, "tabular", &e),
    }

    let mut sequence_stats = Vec::new();
    match sequence_paths(bundles, cfg.max_len, cfg.normalization) {
        Ok(s) => {
            let (n, l, f) = (s.samples, s.max_len, s.features.len());
            out.npy("sequence_x.npy", &s.tensor, &[n, l, f])?;
            out.npy("sequence_mask.npy", &s.mask, &[n, l])?;
            let lengths: Vec<i64> = s.lengths.iter().map(|&v| v as i64).collect();
            out.npy("sequence_lengths.npy", &lengths, &[n])?;
            out.npy("sequence_y.npy", &s.targets, &[n])?;
            out.groups("sequence_groups.npy", &s.groups)?;
            counts.insert("sequence".to_string(), n);
            channels.insert("sequence".to_string(), s.features.clone());
            sequence_stats = s.stats;
            diags.extend(s.diagnostics);
        }
        Err(e) => note(&mut diags, "sequence", &e),
    }

    type PerDesign = Vec<Result<SpatialSet, EngineError>>;
    let windows: PerDesign =
        bundles.par_iter().enumerate().map(|(g, b)| spatial_congestion(b, g, cfg.window, cfg.stride)).collect();
    let masks: PerDesign = bundles
        .par_iter()
        .enumerate()
        .map(|(g, b)| routing_mask(b, g, cfg.mask_size, cfg.mask_threshold, cfg.mask_samples, cfg.seed))
        .collect();
    for (name, parts) in [("congestion", windows), ("routing_mask", masks)] {
        let mut all: Option<SpatialSet> = None;
        for (b, part) in bundles.iter().zip(parts) {
            match part {
                Ok(s) => match &mut all {
                    Some(a) => a.extend(s),
                    None => all = Some(s),
                },
                Err(e) => note(&mut diags, &format!("{name} for {}", b.design.name), &e),
            }
        }
        if let Some(s) = all.filter(|s| s.samples > 0) {
            out.spatial(name, &s)?;
            counts.insert(name.to_string(), s.samples);
            channels.insert(name.to_string(), s.channels.clone());
            diags.extend(s.diagnostics.iter().cloned());
        }
    }

    let g = graph_batch(bundles);
    if g.num_nodes > 0 {
        let edges: Vec<i64> = g.edges.iter().flat_map(|e| [e[0] as i64, e[1] as i64]).collect();
        let offsets = |v: &[usize]| v.iter().map(|&o| o as i64).collect::<Vec<i64>>();
        out.npy("graph_x.npy", &g.node_features, &[g.num_nodes, g.feature_names.len()])?;
        out.npy("graph_edges.npy", &edges, &[g.edges.len(), 2])?;
        out.npy("graph_node_offsets.npy", &offsets(&g.node_offsets), &[g.node_offsets.len()])?;
        out.npy("graph_edge_offsets.npy", &offsets(&g.edge_offsets), &[g.edge_offsets.len()])?;
        out.npy("graph_y.npy", &g.targets, &[g.num_nodes])?;
        out.groups("graph_groups.npy", &g.groups)?;
        counts.insert("graph".to_string(), g.groups.len());
        channels.insert("graph".to_string(), g.feature_names.clone());
    }
    diags.extend(g.diagnostics);

    if counts.is_empty() {
        return Err(EngineError::EmptyDataset("no dataset has samples".into()));
    }

    let strata = cfg.strata.min(bundles.len());
    if strata < cfg.strata {
        diags.push(Diagnostic::new(None, format!("{} designs: strata reduced to {strata}", bundles.len())));
    }
    let sizes: Vec<usize> = bundles.iter().map(|b| b.patches.len()).collect();
    let Split { train, val, test } = split_stratified(&sizes, strata, cfg.fractions, cfg.seed)?;
    let splits = BTreeMap::from([("train".to_string(), train), ("val".to_string(), val), ("test".to_string(), test)]);

    let manifest = DatasetManifest {
        seed: cfg.seed,
        config: cfg.clone(),
        designs,
        splits,
        tensors: out.tensors,
        tables,
        counts,
        sequence_stats,
        channels,
        diagnostics: diags,
    };
    let bytes = json::to_bytes(&manifest)
        .map_err(|source| crate::store::StoreError::Json { file: DATASET_MANIFEST.to_string(), source })?;
    write(&dir.join(DATASET_MANIFEST), &bytes)?;
    Ok(manifest)
}
