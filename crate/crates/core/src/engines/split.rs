// SPDX-License-Identifier: Apache-2.0

//! Design-level stratified train/validation/test split.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_fractions, EngineError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Integer counts summing to `total`, proportional to `weights` by largest remainder.
fn largest_remainder(total: usize, weights: &[f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut out = [0usize; 3];
    for k in 0..3 {
        out[k] = exact[k].floor() as usize;
    }
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let mut left = total - out.iter().sum::<usize>();
    for &k in order.iter().cycle() {
        if left == 0 {
            break;
        }
        out[k] += 1;
        left -= 1;
    }
    out
}

/// Sorts designs by `sizes` (descending), cuts them into `strata` groups of
/// near-equal count and samples each group with a seeded shuffle. Split
/// totals follow the fractions by largest remainder over all designs.
pub fn split_stratified(sizes: &[usize], strata: usize, fractions: [f64; 3], seed: u64) -> Result<Split, EngineError> {
    check_fractions(&fractions)?;
    let n = sizes.len();
    if strata < 1 || n < strata {
        return Err(EngineError::Config("strata".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let groups: Vec<&[usize]> = (0..strata).map(|s| &order[s * n / strata..(s + 1) * n / strata]).collect();
    let target = largest_remainder(n, &fractions);
    let mut quota: Vec<[usize; 3]> = groups.iter().map(|g| largest_remainder(g.len(), &fractions)).collect();
    // move single designs between splits until the totals hit the global target
    loop {
        let totals: Vec<usize> = (0..3).map(|k| quota.iter().map(|q| q[k]).sum()).collect();
        let Some(short) = (0..3).find(|&k| totals[k] < target[k]) else { break };
        let over = (0..3).find(|&k| totals[k] > target[k]).expect("totals sum to n");
        let gain = |s: usize| {
            let len = groups[s].len() as f64;
            (fractions[short] * len - quota[s][short] as f64) - (fractions[over] * len - quota[s][over] as f64)
        };
        let s = (0..strata)
            .filter(|&s| quota[s][over] > 0)
            .max_by(|&a, &b| gain(a).total_cmp(&gain(b)).then(b.cmp(&a)))
            .expect("some stratum holds the surplus");
        quota[s][over] -= 1;
        quota[s][short] += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = Split { train: Vec::new(), val: Vec::new(), test: Vec::new() };
    for (g, q) in groups.iter().zip(&quota) {
        let mut members = g.to_vec();
        members.shuffle(&mut rng);
        split.train.extend(&members[..q[0]]);
        split.val.extend(&members[q[0]..q[0] + q[1]]);
        split.test.extend(&members[q[0] + q[1]..]);
    }
    split.train.sort_unstable();
    split.val.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}
