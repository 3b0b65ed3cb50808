// SPDX-License-Identifier: Apache-2.0

//! Parameter spaces: uniform continuous and categorical dimensions.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::DseError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "distribution", rename_all = "lowercase", deny_unknown_fields)]
pub enum Dimension {
    /// `U(low, high)`, inclusive bounds.
    Uniform {
        name: String,
        low: f64,
        high: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        default: Option<f64>,
    },
    Categorical {
        name: String,
        choices: Vec<Value>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        default: Option<Value>,
    },
}

impl Dimension {
    pub fn uniform(name: &str, low: f64, high: f64) -> Self {
        Dimension::Uniform { name: name.to_string(), low, high, default: None }
    }

    pub fn categorical(name: &str, choices: Vec<Value>) -> Self {
        Dimension::Categorical { name: name.to_string(), choices, default: None }
    }

    pub fn name(&self) -> &str {
        match self {
            Dimension::Uniform { name, .. } | Dimension::Categorical { name, .. } => name,
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> ParamValue {
        match self {
            Dimension::Uniform { low, high, .. } => ParamValue::Real(rng.gen_range(*low..=*high)),
            Dimension::Categorical { choices, .. } => ParamValue::Choice(rng.gen_range(0..choices.len())),
        }
    }

    fn contains(&self, v: &ParamValue) -> bool {
        match (self, v) {
            (Dimension::Uniform { low, high, .. }, ParamValue::Real(x)) => x.is_finite() && low <= x && x <= high,
            (Dimension::Categorical { choices, .. }, ParamValue::Choice(k)) => *k < choices.len(),
            _ => false,
        }
    }

    fn json(&self, v: &ParamValue) -> Value {
        match (self, v) {
            (Dimension::Categorical { choices, .. }, ParamValue::Choice(k)) => choices[*k].clone(),
            (_, ParamValue::Real(x)) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            (_, ParamValue::Choice(k)) => Value::from(*k),
        }
    }
}

/// One coordinate of a parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamValue {
    Real(f64),
    /// Index into the choices of a categorical dimension.
    Choice(usize),
}

impl ParamValue {
    pub fn real(&self) -> Option<f64> {
        match self {
            ParamValue::Real(x) => Some(*x),
            ParamValue::Choice(_) => None,
        }
    }
}

pub type Params = Vec<ParamValue>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpace {
    pub dimensions: Vec<Dimension>,
}

impl ParamSpace {
    pub fn new(dimensions: Vec<Dimension>) -> Result<Self, DseError> {
        let s = Self { dimensions };
        s.validate()?;
        Ok(s)
    }

    /// `n` dimensions `x0..` on `U(0, 1)`.
    pub fn unit_cube(n: usize) -> Self {
        Self { dimensions: (0..n).map(|i| Dimension::uniform(&format!("x{i}"), 0.0, 1.0)).collect() }
    }

    pub fn validate(&self) -> Result<(), DseError> {
        let mut names = BTreeSet::new();
        for d in &self.dimensions {
            if !names.insert(d.name()) {
                return Err(DseError::InvalidSpace(format!("duplicate dimension {}", d.name())));
            }
            match d {
                Dimension::Uniform { name, low, high, default } => {
                    if !(low.is_finite() && high.is_finite() && low < high) {
                        return Err(DseError::InvalidSpace(format!("{name}: need finite low < high")));
                    }
                    if default.is_some_and(|v| !(*low..=*high).contains(&v)) {
                        return Err(DseError::InvalidSpace(format!("{name}: default outside bounds")));
                    }
                }
                Dimension::Categorical { name, choices, default } => {
                    if choices.is_empty() {
                        return Err(DseError::InvalidSpace(format!("{name}: no choices")));
                    }
                    if default.as_ref().is_some_and(|v| !choices.contains(v)) {
                        return Err(DseError::InvalidSpace(format!("{name}: default is not a choice")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dimensions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dimensions.is_empty()
    }

    pub fn sample_prior(&self, rng: &mut impl Rng) -> Params {
        self.dimensions.iter().map(|d| d.sample(rng)).collect()
    }

    pub fn contains(&self, p: &[ParamValue]) -> bool {
        p.len() == self.dimensions.len() && self.dimensions.iter().zip(p).all(|(d, v)| d.contains(v))
    }

    /// Defaults where given, else the interval midpoint or the first choice.
    pub fn defaults(&self) -> Params {
        self.dimensions
            .iter()
            .map(|d| match d {
                Dimension::Uniform { low, high, default, .. } => ParamValue::Real(default.unwrap_or(0.5 * (low + high))),
                Dimension::Categorical { choices, default, .. } => {
                    ParamValue::Choice(default.as_ref().and_then(|v| choices.iter().position(|c| c == v)).unwrap_or(0))
                }
            })
            .collect()
    }

    /// Name -> value, with categorical values as their choice.
    pub fn to_json(&self, p: &[ParamValue]) -> Map<String, Value> {
        self.dimensions.iter().zip(p).map(|(d, v)| (d.name().to_string(), d.json(v))).collect()
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, DseError> {
        let s: Self = serde_json::from_slice(bytes)?;
        s.validate()?;
        Ok(s)
    }

    /// The placement parameters with their uniform priors and defaults.
    pub fn placement() -> Self {
        let u = |name: &str, low: f64, high: f64, d: f64| Dimension::Uniform {
            name: name.to_string(),
            low,
            high,
            default: Some(d),
        };
        let bins = [16, 32, 64, 128, 256, 512, 1024].map(Value::from).to_vec();
        Self {
            dimensions: vec![
                u("init_wirelength_coef", 0.1, 0.5, 0.25),
                u("min_wirelength_force_bar", -500.0, -50.0, -300.0),
                u("target_density", 0.8, 1.0, 0.8),
                Dimension::Categorical { name: "bin_cnt".into(), choices: bins, default: Some(Value::from(64)) },
                u("max_backtrack", 5.0, 50.0, 10.0),
                u("init_density_penalty", 0.0, 0.001, 0.00008),
                u("target_overflow", 0.0, 0.2, 0.1),
                u("initial_prev_coordi_coef", 50.0, 1000.0, 100.0),
                u("min_precondition", 1.0, 10.0, 1.0),
                u("min_phi_coef", 0.75, 1.25, 0.95),
                u("max_phi_coef", 0.75, 1.25, 1.05),
            ],
        }
    }
}
