// SPDX-License-Identifier: Apache-2.0

//! Foundation bundle: one JSON file per net, path and patch plus a manifest
//! of FNV-1a content hashes. The manifest is written last.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::hash::Hasher;
use std::path::Path;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{json, mkdirs, read, write, StoreError};
use crate::vector::{DesignVec, Foundation, GraphVec, Layout, NetVec, PatchVec, PathVec};
use crate::design::Diagnostic;

pub const BUNDLE_VERSION: &str = "1.0";
const SCHEMA: &str = "chipvec-foundation";
const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Net,
    Graph,
    Path,
    Patch,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::Net, Level::Graph, Level::Path, Level::Patch];

    fn prefix(self) -> &'static str {
        match self {
            Level::Net => "nets/",
            Level::Graph => "graph.json",
            Level::Path => "paths/",
            Level::Patch => "patches/",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub nets: usize,
    pub paths: usize,
    pub patches: usize,
    pub graph_nodes: usize,
    pub graph_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub version: String,
    pub design: String,
    pub levels: BTreeSet<Level>,
    pub counts: Counts,
    /// Relative file path -> 64-bit FNV-1a of its bytes, as 16 hex digits.
    pub files: BTreeMap<String, String>,
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = fnv::FnvHasher::default();
    h.write(bytes);
    h.finish()
}

fn hex(bytes: &[u8]) -> String {
    format!("{:016x}", fnv1a(bytes))
}

fn encode<T: Serialize>(name: &str, v: &T) -> Result<Vec<u8>, StoreError> {
    json::to_bytes(v).map_err(|source| StoreError::Json { file: name.to_string(), source })
}

fn put<T: Serialize>(dir: &Path, name: &str, v: &T) -> Result<(String, String), StoreError> {
    let bytes = encode(name, v)?;
    write(&dir.join(name), &bytes)?;
    Ok((name.to_string(), hex(&bytes)))
}

fn put_all<T: Serialize + Sync>(
    dir: &Path,
    items: &[T],
    name: impl Fn(usize, &T) -> String + Sync,
) -> Result<Vec<(String, String)>, StoreError> {
    items.par_iter().enumerate().map(|(i, v)| put(dir, &name(i, v), v)).collect()
}

fn reset_dir(dir: &Path) -> Result<(), StoreError> {
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(super::io_err(dir))?;
    }
    mkdirs(dir)
}

/// Writes the design-level files plus the requested levels under `dir`.
/// Levels not requested keep their files and manifest entries from an
/// earlier save of the same design.
pub fn save_bundle(dir: &Path, f: &Foundation, levels: &[Level]) -> Result<Manifest, StoreError> {
    mkdirs(dir)?;
    let requested: BTreeSet<Level> = levels.iter().copied().collect();
    let previous = read_manifest(dir).ok().filter(|m| m.design == f.design.name && m.version == BUNDLE_VERSION);
    let manifest_path = dir.join(MANIFEST);
    if manifest_path.exists() {
        fs::remove_file(&manifest_path).map_err(super::io_err(&manifest_path))?;
    }
    let mut files: BTreeMap<String, String> = BTreeMap::new();
    let mut counts = Counts::default();
    let mut present = BTreeSet::new();
    if let Some(prev) = &previous {
        for &l in prev.levels.difference(&requested) {
            present.insert(l);
            for (k, v) in prev.files.iter().filter(|(k, _)| k.starts_with(l.prefix())) {
                files.insert(k.clone(), v.clone());
            }
            match l {
                Level::Net => counts.nets = prev.counts.nets,
                Level::Path => counts.paths = prev.counts.paths,
                Level::Patch => counts.patches = prev.counts.patches,
                Level::Graph => (counts.graph_nodes, counts.graph_edges) = (prev.counts.graph_nodes, prev.counts.graph_edges),
            }
        }
    }
    files.extend([
        put(dir, "design.json", &f.design)?,
        put(dir, "layout.json", &f.layout)?,
        put(dir, "diagnostics.json", &f.diagnostics)?,
    ]);
    for &l in &requested {
        present.insert(l);
        match l {
            Level::Net => {
                reset_dir(&dir.join("nets"))?;
                files.extend(put_all(dir, &f.nets, |_, n| format!("nets/net_{}.json", n.index))?);
                counts.nets = f.nets.len();
            }
            Level::Graph => {
                files.extend([put(dir, "graph.json", &f.graph)?]);
                (counts.graph_nodes, counts.graph_edges) = (f.graph.nodes.len(), f.graph.edges.len());
            }
            Level::Path => {
                reset_dir(&dir.join("paths"))?;
                files.extend(put_all(dir, &f.paths, |i, _| format!("paths/path_{i}.json"))?);
                counts.paths = f.paths.len();
            }
            Level::Patch => {
                reset_dir(&dir.join("patches"))?;
                files.extend(put_all(dir, &f.patches, |_, p| format!("patches/patch_{}.json", p.id))?);
                counts.patches = f.patches.len();
            }
        }
    }
    let manifest = Manifest {
        schema: SCHEMA.to_string(),
        version: BUNDLE_VERSION.to_string(),
        design: f.design.name.clone(),
        levels: present,
        counts,
        files,
    };
    write(&manifest_path, &encode(MANIFEST, &manifest)?)?;
    Ok(manifest)
}

fn read_manifest(dir: &Path) -> Result<Manifest, StoreError> {
    let path = dir.join(MANIFEST);
    if !path.is_file() {
        return Err(StoreError::NotABundle(dir.to_path_buf()));
    }
    let m: Manifest =
        json::from_bytes(&read(&path)?).map_err(|_| StoreError::CorruptBundle(MANIFEST.to_string()))?;
    if m.schema != SCHEMA {
        return Err(StoreError::NotABundle(dir.to_path_buf()));
    }
    let major = |v: &str| v.split('.').next().map(str::to_string);
    if major(&m.version) != major(BUNDLE_VERSION) {
        return Err(StoreError::Version(m.version));
    }
    Ok(m)
}

fn fetch<T: DeserializeOwned>(dir: &Path, name: &str, hash: &str) -> Result<T, StoreError> {
    let bytes = read(&dir.join(name)).map_err(|_| StoreError::CorruptBundle(name.to_string()))?;
    if hex(&bytes) != hash {
        return Err(StoreError::CorruptBundle(name.to_string()));
    }
    json::from_bytes(&bytes).map_err(|_| StoreError::CorruptBundle(name.to_string()))
}

fn fetch_level<T: DeserializeOwned + Send>(dir: &Path, m: &Manifest, l: Level) -> Result<Vec<T>, StoreError> {
    let mut named: Vec<(usize, &String, &String)> = m
        .files
        .iter()
        .filter(|(k, _)| k.starts_with(l.prefix()))
        .map(|(k, h)| {
            let stem = k.rsplit('_').next().and_then(|s| s.strip_suffix(".json"));
            let idx = stem.and_then(|s| s.parse().ok()).ok_or_else(|| StoreError::CorruptBundle(k.clone()))?;
            Ok((idx, k, h))
        })
        .collect::<Result<_, StoreError>>()?;
    named.sort_unstable_by_key(|t| t.0);
    named.par_iter().map(|(_, k, h)| fetch(dir, k, h)).collect()
}

/// Loads and verifies a bundle. Levels the manifest does not list come back empty.
pub fn load_bundle(dir: &Path) -> Result<(Foundation, Manifest), StoreError> {
    let m = read_manifest(dir)?;
    let hash = |name: &str| m.files.get(name).ok_or_else(|| StoreError::CorruptBundle(name.to_string()));
    let design: DesignVec = fetch(dir, "design.json", hash("design.json")?)?;
    let layout: Layout = fetch(dir, "layout.json", hash("layout.json")?)?;
    let diagnostics: Vec<Diagnostic> = fetch(dir, "diagnostics.json", hash("diagnostics.json")?)?;
    let graph = if m.levels.contains(&Level::Graph) {
        fetch(dir, "graph.json", hash("graph.json")?)?
    } else {
        GraphVec { nodes: Vec::new(), edges: Vec::new() }
    };
    let nets: Vec<NetVec> = if m.levels.contains(&Level::Net) { fetch_level(dir, &m, Level::Net)? } else { Vec::new() };
    let paths: Vec<PathVec> = if m.levels.contains(&Level::Path) { fetch_level(dir, &m, Level::Path)? } else { Vec::new() };
    let patches: Vec<PatchVec> =
        if m.levels.contains(&Level::Patch) { fetch_level(dir, &m, Level::Patch)? } else { Vec::new() };
    let c = &m.counts;
    let checks = [
        (Level::Net, nets.len(), c.nets),
        (Level::Path, paths.len(), c.paths),
        (Level::Patch, patches.len(), c.patches),
    ];
    for (l, got, want) in checks {
        if got != want {
            return Err(StoreError::CorruptBundle(format!("{} holds {got} files, manifest counts {want}", l.prefix())));
        }
    }
    if graph.nodes.len() != c.graph_nodes || graph.edges.len() != c.graph_edges {
        return Err(StoreError::CorruptBundle("graph.json".into()));
    }
    let grid = design.grid;
    Ok((Foundation { design, layout, graph, nets, paths, grid, patches, diagnostics }, m))
}
