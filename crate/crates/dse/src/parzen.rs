// SPDX-License-Identifier: Apache-2.0

//! Per-dimension Parzen densities. Continuous: truncated Gaussian kernels
//! on the observations plus the uniform prior as one extra component.
//! Categorical: add-one smoothed frequencies.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;

use crate::space::{Dimension, ParamValue, Params, ParamSpace};

/// Kernel bandwidth floor as a fraction of the interval.
pub const BANDWIDTH_FLOOR: f64 = 1e-3;

fn norm_cdf(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / SQRT_2))
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller; 1 - u keeps the log argument positive
    let u: f64 = 1.0 - rng.gen::<f64>();
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
}

#[derive(Debug, Clone, PartialEq)]
enum Density {
    Continuous {
        low: f64,
        high: f64,
        mus: Vec<f64>,
        sigma: f64,
        /// Per kernel: log of weight over truncated mass times the Gaussian constant.
        log_norm: Vec<f64>,
        prior_weight: f64,
    },
    Categorical { log_p: Vec<f64> },
}

impl Density {
    fn fit(dim: &Dimension, obs: &[ParamValue]) -> Self {
        match dim {
            Dimension::Uniform { low, high, .. } => {
                let mus: Vec<f64> = obs.iter().filter_map(ParamValue::real).collect();
                let range = high - low;
                let n = mus.len() as f64;
                let sigma = if mus.len() < 2 {
                    range
                } else {
                    let mean = mus.iter().sum::<f64>() / n;
                    let sd = (mus.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt();
                    // Scott's rule in one dimension. The count-scaled floor keeps
                    // kernels from collapsing onto a tight cluster of good points,
                    // which otherwise lets the search creep by one floor width per trial.
                    let floor = (BANDWIDTH_FLOOR * range).max(range / (n + 1.0).min(100.0));
                    (sd * n.powf(-0.2)).clamp(floor, range)
                };
                let w = 1.0 / (n + 1.0);
                let log_norm = mus
                    .iter()
                    .map(|&mu| {
                        let mass = norm_cdf((high - mu) / sigma) - norm_cdf((low - mu) / sigma);
                        w.ln() - mass.max(f64::MIN_POSITIVE).ln() - sigma.ln() - 0.5 * (2.0 * PI).ln()
                    })
                    .collect();
                Density::Continuous { low: *low, high: *high, mus, sigma, log_norm, prior_weight: w }
            }
            Dimension::Categorical { choices, .. } => {
                let mut counts = vec![1.0; choices.len()];
                for v in obs {
                    if let ParamValue::Choice(k) = v {
                        counts[*k] += 1.0;
                    }
                }
                let total: f64 = counts.iter().sum();
                Density::Categorical { log_p: counts.iter().map(|c| (c / total).ln()).collect() }
            }
        }
    }

    fn log_pdf(&self, v: &ParamValue) -> f64 {
        match (self, v) {
            (Density::Continuous { low, high, mus, sigma, log_norm, prior_weight }, ParamValue::Real(x)) => {
                let mut terms: Vec<f64> = mus
                    .iter()
                    .zip(log_norm)
                    .map(|(mu, ln)| {
                        let z = (x - mu) / sigma;
                        ln - 0.5 * z * z
                    })
                    .collect();
                terms.push(prior_weight.ln() - (high - low).ln());
                log_sum_exp(&terms)
            }
            (Density::Categorical { log_p }, ParamValue::Choice(k)) => log_p[*k],
            _ => f64::NEG_INFINITY,
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> ParamValue {
        match self {
            Density::Continuous { low, high, mus, sigma, .. } => {
                let k = rng.gen_range(0..=mus.len());
                if k == mus.len() {
                    return ParamValue::Real(rng.gen_range(*low..=*high));
                }
                for _ in 0..64 {
                    let x = mus[k] + sigma * standard_normal(rng);
                    if (*low..=*high).contains(&x) {
                        return ParamValue::Real(x);
                    }
                }
                ParamValue::Real(mus[k].clamp(*low, *high))
            }
            Density::Categorical { log_p } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (k, lp) in log_p.iter().enumerate() {
                    acc += lp.exp();
                    if u < acc {
                        return ParamValue::Choice(k);
                    }
                }
                ParamValue::Choice(log_p.len() - 1)
            }
        }
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Product of independent per-dimension densities.
#[derive(Debug, Clone, PartialEq)]
pub struct Parzen {
    dims: Vec<Density>,
}

impl Parzen {
    pub fn fit(space: &ParamSpace, observations: &[&Params]) -> Self {
        let dims = space
            .dimensions
            .iter()
            .enumerate()
            .map(|(j, d)| {
                let col: Vec<ParamValue> = observations.iter().map(|p| p[j]).collect();
                Density::fit(d, &col)
            })
            .collect();
        Self { dims }
    }

    pub fn log_pdf(&self, p: &[ParamValue]) -> f64 {
        self.dims.iter().zip(p).map(|(d, v)| d.log_pdf(v)).sum()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Params {
        self.dims.iter().map(|d| d.sample(rng)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn integrate(p: &Parzen, low: f64, high: f64) -> f64 {
        let n = 200_000;
        let h = (high - low) / n as f64;
        (0..n).map(|i| p.log_pdf(&[ParamValue::Real(low + (i as f64 + 0.5) * h)]).exp() * h).sum()
    }

    #[test]
    fn continuous_density_integrates_to_one() {
        let space = ParamSpace::new(vec![Dimension::uniform("x", -2.0, 3.0)]).unwrap();
        let obs = [vec![ParamValue::Real(-1.9)], vec![ParamValue::Real(0.4)], vec![ParamValue::Real(2.95)]];
        let refs: Vec<&Params> = obs.iter().collect();
        let p = Parzen::fit(&space, &refs);
        assert!((integrate(&p, -2.0, 3.0) - 1.0).abs() < 1e-6);
        let empty = Parzen::fit(&space, &[]);
        assert!((empty.log_pdf(&[ParamValue::Real(0.0)]) - (0.2f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn categorical_is_add_one_smoothed() {
        let space = ParamSpace::new(vec![Dimension::categorical("c", vec![1.into(), 2.into(), 3.into()])]).unwrap();
        let obs = [vec![ParamValue::Choice(2)], vec![ParamValue::Choice(2)]];
        let refs: Vec<&Params> = obs.iter().collect();
        let p = Parzen::fit(&space, &refs);
        assert!((p.log_pdf(&[ParamValue::Choice(2)]).exp() - 3.0 / 5.0).abs() < 1e-12);
        assert!((p.log_pdf(&[ParamValue::Choice(0)]).exp() - 1.0 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn samples_stay_in_bounds() {
        let space = ParamSpace::new(vec![Dimension::uniform("x", 0.8, 1.0)]).unwrap();
        let obs = [vec![ParamValue::Real(0.8)], vec![ParamValue::Real(1.0)]];
        let refs: Vec<&Params> = obs.iter().collect();
        let p = Parzen::fit(&space, &refs);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            assert!(space.contains(&p.sample(&mut rng)));
        }
    }
}
