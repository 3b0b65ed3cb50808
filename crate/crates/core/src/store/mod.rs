// SPDX-License-Identifier: Apache-2.0

//! Workspace layout, configuration and Foundation Data serialization.

mod bundle;
pub mod json;
mod npy;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::SynthParams;
use crate::engines::EngineConfig;
use crate::vector::{VectorConfig, VectorError};

pub use bundle::{fnv1a, load_bundle, save_bundle, Counts, Level, Manifest, BUNDLE_VERSION};
pub use npy::{read_npy, write_npy, NpyElement};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("invalid config field {0}")]
    Config(String),
    #[error("{0} is not a workspace (no config.json)")]
    NotAWorkspace(PathBuf),
    #[error("{0} holds no bundle manifest")]
    NotABundle(PathBuf),
    #[error("corrupt bundle file {0}")]
    CorruptBundle(String),
    #[error("unsupported schema version {0}")]
    Version(String),
    #[error("{file}: {source}")]
    Json { file: String, source: serde_json::Error },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

pub(crate) fn read(path: &Path) -> Result<Vec<u8>, StoreError> {
    fs::read(path).map_err(io_err(path))
}

pub(crate) fn write(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    fs::write(path, bytes).map_err(io_err(path))
}

pub(crate) fn mkdirs(path: &Path) -> Result<(), StoreError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

/// Design sources. Relative paths resolve against the workspace root.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub def: Option<PathBuf>,
    pub lef: Option<PathBuf>,
    pub tech_sidecar: Option<PathBuf>,
    /// Parameters of a generated design, kept for provenance.
    pub synthetic: Option<SynthParams>,
}

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkspaceConfig {
    pub version: u32,
    pub inputs: InputConfig,
    pub vector: VectorConfig,
    pub engines: EngineConfig,
    /// Worker threads; 0 lets the runtime decide.
    pub threads: usize,
}

impl Default for WorkspaceConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            inputs: InputConfig::default(),
            vector: VectorConfig::default(),
            engines: EngineConfig::default(),
            threads: 0,
        }
    }
}

impl WorkspaceConfig {
    pub fn validate(&self) -> Result<(), StoreError> {
        if self.version != CONFIG_VERSION {
            return Err(StoreError::Version(self.version.to_string()));
        }
        self.vector.validate().map_err(|e| match e {
            VectorError::Config(f) => StoreError::Config(f),
            other => StoreError::Config(other.to_string()),
        })?;
        self.engines.validate().map_err(|e| StoreError::Config(e.field().to_string()))
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, StoreError> {
        let cfg: Self =
            serde_json::from_slice(bytes).map_err(|source| StoreError::Json { file: "config.json".into(), source })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(self).expect("config serializes");
        v.push(b'\n');
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Workspace {
    pub root: PathBuf,
    pub config: WorkspaceConfig,
}

pub const SUBDIRS: [&str; 4] = ["result", "report", "feature", "vectors"];

impl Workspace {
    /// Creates the directory layout and writes `config.json`. Existing
    /// outputs are left in place.
    pub fn create(root: impl Into<PathBuf>, config: WorkspaceConfig) -> Result<Self, StoreError> {
        config.validate()?;
        let root = root.into();
        for d in SUBDIRS {
            mkdirs(&root.join(d))?;
        }
        let ws = Self { root, config };
        ws.save_config()?;
        Ok(ws)
    }

    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        let path = root.join("config.json");
        if !path.is_file() {
            return Err(StoreError::NotAWorkspace(root));
        }
        let config = WorkspaceConfig::from_json(&read(&path)?)?;
        for d in SUBDIRS {
            mkdirs(&root.join(d))?;
        }
        Ok(Self { root, config })
    }

    pub fn save_config(&self) -> Result<(), StoreError> {
        write(&self.root.join("config.json"), &self.config.to_json())
    }

    pub fn result_dir(&self) -> PathBuf {
        self.root.join("result")
    }

    pub fn report_dir(&self) -> PathBuf {
        self.root.join("report")
    }

    pub fn feature_dir(&self) -> PathBuf {
        self.root.join("feature")
    }

    pub fn vectors_dir(&self) -> PathBuf {
        self.root.join("vectors")
    }

    /// Foundation bundle of the workspace design.
    pub fn bundle_dir(&self) -> PathBuf {
        self.vectors_dir()
    }

    pub fn fidelity_path(&self) -> PathBuf {
        self.feature_dir().join("fidelity.json")
    }

    pub fn dataset_dir(&self) -> PathBuf {
        self.feature_dir().join("dataset")
    }

    /// Absolute form of a config path.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }
}

pub fn create_workspace(root: impl Into<PathBuf>, config: WorkspaceConfig) -> Result<Workspace, StoreError> {
    Workspace::create(root, config)
}

/// RFC 4180 table with a header row.
pub fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, StoreError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| StoreError::Io { path: PathBuf::from("<csv>"), source: e.into_error() })
}

/// Parses a table written by [`csv_bytes`]; returns `(header, rows)`.
pub fn parse_csv(bytes: &[u8]) -> Result<(Vec<String>, Vec<Vec<String>>), StoreError> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers()?.iter().map(str::to_string).collect();
    let rows = r.records().map(|rec| rec.map(|r| r.iter().map(str::to_string).collect())).collect::<Result<_, _>>()?;
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_quotes_fields() {
        let header = vec!["name".to_string(), "value".to_string()];
        let rows = vec![vec!["a,b".to_string(), "1.5".to_string()], vec!["say \"hi\"".to_string(), "-2".to_string()]];
        let bytes = csv_bytes(&header, &rows).unwrap();
        assert!(String::from_utf8(bytes.clone()).unwrap().starts_with("name,value\r\n\"a,b\",1.5\r\n"));
        assert_eq!(parse_csv(&bytes).unwrap(), (header, rows));
    }

    #[test]
    fn config_rejects_zero_patch_multiple() {
        let mut c = WorkspaceConfig::default();
        c.vector.patch_multiple = 0;
        assert!(matches!(c.validate(), Err(StoreError::Config(f)) if f == "patch_multiple"));
    }

    #[test]
    fn config_json_round_trip() {
        let mut c = WorkspaceConfig::default();
        c.vector.clock_period = 7.25e-10;
        c.inputs.def = Some("result/a.def".into());
        c.inputs.synthetic = Some(SynthParams::for_cells(100));
        assert_eq!(WorkspaceConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
