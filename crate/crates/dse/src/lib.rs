// SPDX-License-Identifier: Apache-2.0

//! Multi-objective tree-structured Parzen estimator over uniform and
//! categorical parameter spaces, with Pareto ranks and 2-D hypervolume.

mod io;
mod motpe;
pub mod objectives;
mod pareto;
mod parzen;
mod space;

use thiserror::Error;

pub use io::{front_json, history_csv};
pub use motpe::{minimized, run, suggest, Direction, MotpeConfig, Objective, RunResult, Sampler, TrialRecord};
pub use pareto::{crowding_distance, dominates, hypervolume_2d, nondominated_sort, selection_order, within_reference};
pub use parzen::{Parzen, BANDWIDTH_FLOOR};
pub use space::{Dimension, ParamSpace, ParamValue, Params};

#[derive(Debug, Error)]
pub enum DseError {
    #[error("invalid parameter space: {0}")]
    InvalidSpace(String),
    #[error("invalid objective: {0}")]
    InvalidObjective(String),
    #[error("reference point: {0}")]
    RefError(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Hypervolume of the completed 2-objective trials (taken as minimization)
/// that lie strictly inside the reference box.
pub fn trials_hypervolume(trials: &[TrialRecord], reference: [f64; 2]) -> Result<f64, DseError> {
    let pts: Vec<[f64; 2]> =
        trials.iter().filter(|t| t.completed() && t.objectives.len() == 2).map(|t| [t.objectives[0], t.objectives[1]]).collect();
    hypervolume_2d(&within_reference(&pts, reference), reference)
}
