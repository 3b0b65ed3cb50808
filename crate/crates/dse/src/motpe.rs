// SPDX-License-Identifier: Apache-2.0

//! Multi-objective TPE: split completed trials into a good and a bad set
//! by dominance rank (crowding distance cuts a rank), fit a Parzen density
//! to each, and propose the candidate from the good density with the
//! largest density ratio.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::pareto::{nondominated_sort, selection_order};
use crate::parzen::Parzen;
use crate::space::{ParamSpace, Params};
use crate::DseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub name: String,
    pub direction: Direction,
}

impl Objective {
    pub fn minimize(name: &str) -> Self {
        Self { name: name.to_string(), direction: Direction::Minimize }
    }

    pub fn maximize(name: &str) -> Self {
        Self { name: name.to_string(), direction: Direction::Maximize }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotpeConfig {
    /// Share of completed trials in the good set.
    pub gamma: f64,
    pub n_candidates: usize,
    /// Completed trials before the densities take over from the prior.
    pub n_startup: usize,
}

impl Default for MotpeConfig {
    fn default() -> Self {
        Self { gamma: 0.25, n_candidates: 24, n_startup: 10 }
    }
}

impl MotpeConfig {
    pub fn validate(&self) -> Result<(), DseError> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(DseError::Config("gamma must lie in (0, 1)".into()));
        }
        if self.n_candidates == 0 {
            return Err(DseError::Config("n_candidates must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub number: usize,
    pub params: Params,
    /// As returned by the objective; empty for a failed trial.
    pub objectives: Vec<f64>,
    /// Dominance rank among completed trials once the run ends.
    pub rank: Option<usize>,
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn completed(&self) -> bool {
        self.error.is_none()
    }
}

/// Objective values turned into minimization.
pub fn minimized(values: &[f64], objectives: &[Objective]) -> Vec<f64> {
    values
        .iter()
        .zip(objectives)
        .map(|(v, o)| match o.direction {
            Direction::Minimize => *v,
            Direction::Maximize => -v,
        })
        .collect()
}

/// Next parameter vector. Falls back to the prior while fewer than
/// `n_startup` trials completed or when either set would be empty.
pub fn suggest(
    space: &ParamSpace,
    history: &[TrialRecord],
    objectives: &[Objective],
    cfg: &MotpeConfig,
    rng: &mut impl Rng,
) -> Params {
    let done: Vec<&TrialRecord> = history.iter().filter(|t| t.completed()).collect();
    let n = done.len();
    if n < cfg.n_startup.max(2) {
        return space.sample_prior(rng);
    }
    let points: Vec<Vec<f64>> = done.iter().map(|t| minimized(&t.objectives, objectives)).collect();
    let Ok(order) = selection_order(&points) else {
        return space.sample_prior(rng);
    };
    let n_good = ((cfg.gamma * n as f64).ceil() as usize).clamp(1, n - 1);
    let good: Vec<&Params> = order[..n_good].iter().map(|&i| &done[i].params).collect();
    let bad: Vec<&Params> = order[n_good..].iter().map(|&i| &done[i].params).collect();
    let l = Parzen::fit(space, &good);
    let g = Parzen::fit(space, &bad);
    let mut best: Option<(f64, Params)> = None;
    for _ in 0..cfg.n_candidates {
        let c = l.sample(rng);
        let score = l.log_pdf(&c) - g.log_pdf(&c);
        if best.as_ref().map_or(true, |(s, _)| score > *s) {
            best = Some((score, c));
        }
    }
    best.map_or_else(|| space.sample_prior(rng), |(_, c)| c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    Motpe,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub history: Vec<TrialRecord>,
    /// Rank-0 trials in trial order.
    pub front: Vec<TrialRecord>,
}

/// Runs exactly `budget` trials. A trial fails when the objective returns
/// an error, the wrong number of values or a non-finite value; failed
/// trials count against the budget but are excluded from the densities.
pub fn run<F>(
    space: &ParamSpace,
    objectives: &[Objective],
    mut objective: F,
    budget: usize,
    seed: u64,
    sampler: Sampler,
    cfg: &MotpeConfig,
) -> Result<RunResult, DseError>
where
    F: FnMut(&Params) -> Result<Vec<f64>, String>,
{
    space.validate()?;
    cfg.validate()?;
    if objectives.is_empty() {
        return Err(DseError::Config("no objectives".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut history: Vec<TrialRecord> = Vec::with_capacity(budget);
    for number in 0..budget {
        let params = match sampler {
            Sampler::Motpe => suggest(space, &history, objectives, cfg, &mut rng),
            Sampler::Random => space.sample_prior(&mut rng),
        };
        debug_assert!(space.contains(&params));
        let (values, error) = match objective(&params) {
            Ok(v) if v.len() != objectives.len() => {
                (Vec::new(), Some(format!("{} values for {} objectives", v.len(), objectives.len())))
            }
            Ok(v) if v.iter().any(|x| !x.is_finite()) => (Vec::new(), Some("non-finite objective value".into())),
            Ok(v) => (v, None),
            Err(e) => (Vec::new(), Some(e)),
        };
        history.push(TrialRecord { number, params, objectives: values, rank: None, error });
    }
    let done: Vec<usize> = (0..history.len()).filter(|&i| history[i].completed()).collect();
    let points: Vec<Vec<f64>> = done.iter().map(|&i| minimized(&history[i].objectives, objectives)).collect();
    for (&i, r) in done.iter().zip(nondominated_sort(&points)?) {
        history[i].rank = Some(r);
    }
    let front = history.iter().filter(|t| t.rank == Some(0)).cloned().collect();
    Ok(RunResult { history, front })
}
