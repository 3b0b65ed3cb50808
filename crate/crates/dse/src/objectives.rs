// SPDX-License-Identifier: Apache-2.0

//! Built-in test objectives.

use crate::space::{Dimension, ParamValue, ParamSpace};

/// ZDT1 on `[0, 1]^n`, two minimization objectives. The Pareto front is
/// `f2 = 1 - sqrt(f1)` where every coordinate but the first is 0.
pub fn zdt1(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let f1 = x[0];
    let g = if n > 1 { 1.0 + 9.0 * x[1..].iter().sum::<f64>() / (n - 1) as f64 } else { 1.0 };
    vec![f1, g * (1.0 - (f1 / g).sqrt())]
}

pub fn sphere(x: &[f64]) -> Vec<f64> {
    vec![x.iter().map(|v| v * v).sum()]
}

/// Coordinates mapped to `[0, 1]`; a categorical dimension maps its
/// choice index onto the unit interval.
pub fn normalized(space: &ParamSpace, p: &[ParamValue]) -> Vec<f64> {
    space
        .dimensions
        .iter()
        .zip(p)
        .map(|(d, v)| match (d, v) {
            (Dimension::Uniform { low, high, .. }, ParamValue::Real(x)) => (x - low) / (high - low),
            (Dimension::Categorical { choices, .. }, ParamValue::Choice(k)) if choices.len() > 1 => {
                *k as f64 / (choices.len() - 1) as f64
            }
            _ => 0.0,
        })
        .collect()
}

/// Toy placement surrogate for demos: `[wirelength proxy, overflow proxy]`,
/// both minimized. A higher `target_density` shortens wires and raises
/// overflow; other dimensions add mild quadratic terms. Missing named
/// dimensions read as 0.5.
pub fn placement_surrogate(space: &ParamSpace, p: &[ParamValue]) -> Vec<f64> {
    let u = normalized(space, p);
    let get = |name: &str| space.dimensions.iter().position(|d| d.name() == name).map_or(0.5, |i| u[i]);
    let (td, ov, bins) = (get("target_density"), get("target_overflow"), get("bin_cnt"));
    let named = ["target_density", "target_overflow", "bin_cnt"];
    let others: Vec<f64> =
        space.dimensions.iter().zip(&u).filter(|(d, _)| !named.contains(&d.name())).map(|(_, v)| *v).collect();
    let k = others.len().max(1) as f64;
    let wl = 1.0 + 0.5 * (1.0 - td) + 0.3 * ov + 0.2 * (bins - 0.5).powi(2)
        + 0.1 * others.iter().map(|v| (v - 0.4).powi(2)).sum::<f64>() / k;
    let overflow = 0.6 * td * td + 0.4 * ov + 0.1 * (bins - 0.5).powi(2)
        + 0.05 * others.iter().map(|v| (v - 0.6).powi(2)).sum::<f64>() / k;
    vec![wl, overflow]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zdt1_front() {
        assert_eq!(zdt1(&[0.25, 0.0, 0.0, 0.0, 0.0]), vec![0.25, 0.5]);
        assert_eq!(zdt1(&[0.0, 1.0, 1.0, 1.0, 1.0]), vec![0.0, 10.0]);
    }

    #[test]
    fn surrogate_trades_density_for_overflow() {
        let s = ParamSpace::placement();
        let mut lo = s.defaults();
        let mut hi = s.defaults();
        lo[2] = ParamValue::Real(0.8);
        hi[2] = ParamValue::Real(1.0);
        let (a, b) = (placement_surrogate(&s, &lo), placement_surrogate(&s, &hi));
        assert!(b[0] < a[0] && b[1] > a[1]);
    }
}
