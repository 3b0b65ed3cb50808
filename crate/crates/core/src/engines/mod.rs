// SPDX-License-Identifier: Apache-2.0

//! Dataset assembly from Foundation Data: tabular, sequence, spatial and
//! graph sets, plus design-level stratified splits.

mod emit;
mod graph;
mod sequence;
mod spatial;
mod split;
mod tabular;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use emit::{emit_datasets, DatasetManifest, TensorEntry, DATASET_MANIFEST};
pub use graph::{graph_batch, GraphSet, NODE_CLASSES};
pub use sequence::{denormalize, sequence_paths, FeatureStats, SequenceSet, SEQUENCE_FEATURES};
pub use spatial::{routing_mask, spatial_congestion, SpatialSet, SPATIAL_CHANNELS};
pub use split::{split_stratified, Split};
pub use tabular::{tabular_wirelength, TabularSet, TABULAR_COLUMNS, TABULAR_LABELS};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("empty dataset: {0}")]
    EmptyDataset(String),
    #[error("invalid engine setting {0}")]
    Config(String),
    #[error("patch grid {nx}x{ny} smaller than window {window}")]
    GridTooSmall { nx: usize, ny: usize, window: usize },
    #[error(transparent)]
    Store(#[from] crate::store::StoreError),
}

impl EngineError {
    /// Offending config field, or `"engines"` for other errors.
    pub fn field(&self) -> &str {
        match self {
            EngineError::Config(f) => f,
            _ => "engines",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Mean and standard deviation.
    #[default]
    ZScore,
    /// Median and interquartile range.
    Robust,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// Sequence length after padding or truncation.
    pub max_len: usize,
    pub window: usize,
    pub stride: usize,
    pub mask_size: usize,
    pub mask_threshold: f64,
    /// Routing-mask samples per design; 0 keeps all.
    pub mask_samples: usize,
    pub normalization: Normalization,
    pub strata: usize,
    /// Train, validation, test.
    pub fractions: [f64; 3],
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            max_len: 32,
            window: 4,
            stride: 3,
            mask_size: 16,
            mask_threshold: 0.4,
            mask_samples: 256,
            normalization: Normalization::ZScore,
            strata: 3,
            fractions: [0.7, 0.1, 0.2],
            seed: 0,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |f: &str| Err(EngineError::Config(f.to_string()));
        if self.max_len < 1 {
            return bad("max_len");
        }
        if self.window < 1 {
            return bad("window");
        }
        if self.stride < 1 {
            return bad("stride");
        }
        if self.mask_size < 1 {
            return bad("mask_size");
        }
        if !(0.0..=1.0).contains(&self.mask_threshold) {
            return bad("mask_threshold");
        }
        if self.strata < 1 {
            return bad("strata");
        }
        check_fractions(&self.fractions)
    }
}

pub(crate) fn check_fractions(f: &[f64; 3]) -> Result<(), EngineError> {
    if f.iter().any(|x| !x.is_finite() || *x < 0.0) || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(EngineError::Config("fractions".into()));
    }
    Ok(())
}

/// Linear interpolation between closest ranks; `q` in [0, 1]. `sorted` must be ascending and non-empty.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// `(center, scale)` of `values`; `None` when the scale is zero.
pub(crate) fn fit(values: &[f64], how: Normalization) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let (c, s) = match how {
        Normalization::ZScore => {
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            (mean, var.sqrt())
        }
        Normalization::Robust => {
            let mut s = values.to_vec();
            s.sort_by(f64::total_cmp);
            (percentile(&s, 0.5), percentile(&s, 0.75) - percentile(&s, 0.25))
        }
    };
    (s > 0.0 && s.is_finite()).then_some((c, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 0.5), 2.5);
        assert_eq!(percentile(&v, 1.0), 4.0);
        assert_eq!(percentile(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn fractions_must_sum_to_one() {
        let c = EngineConfig { fractions: [0.5, 0.2, 0.2], ..EngineConfig::default() };
        assert_eq!(c.validate().unwrap_err().field(), "fractions");
    }

    #[test]
    fn constant_values_have_no_scale() {
        assert!(fit(&[2.0, 2.0], Normalization::ZScore).is_none());
        assert_eq!(fit(&[1.0, 3.0], Normalization::ZScore), Some((2.0, 1.0)));
    }
}
