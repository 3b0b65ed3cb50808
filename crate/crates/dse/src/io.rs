// SPDX-License-Identifier: Apache-2.0

//! History CSV (one row per trial) and front JSON.

use serde_json::{json, Value};

use crate::motpe::{Objective, TrialRecord};
use crate::space::{Dimension, ParamValue, ParamSpace};
use crate::DseError;

fn cell(d: &Dimension, v: &ParamValue) -> String {
    match (d, v) {
        (Dimension::Categorical { choices, .. }, ParamValue::Choice(k)) => match &choices[*k] {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        },
        (_, ParamValue::Real(x)) => format!("{x:?}"),
        (_, ParamValue::Choice(k)) => k.to_string(),
    }
}

/// Columns: `number, state, <params>, <objectives>, rank, error`.
pub fn history_csv(space: &ParamSpace, objectives: &[Objective], history: &[TrialRecord]) -> Result<Vec<u8>, DseError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["number".to_string(), "state".to_string()];
    header.extend(space.dimensions.iter().map(|d| d.name().to_string()));
    header.extend(objectives.iter().map(|o| o.name.clone()));
    header.extend(["rank".to_string(), "error".to_string()]);
    w.write_record(&header)?;
    for t in history {
        let mut row = vec![t.number.to_string(), if t.completed() { "complete" } else { "failed" }.to_string()];
        row.extend(space.dimensions.iter().zip(&t.params).map(|(d, v)| cell(d, v)));
        if t.completed() {
            row.extend(t.objectives.iter().map(|v| format!("{v:?}")));
        } else {
            row.extend(objectives.iter().map(|_| String::new()));
        }
        row.push(t.rank.map_or_else(String::new, |r| r.to_string()));
        row.push(t.error.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| DseError::Io(e.into_error()))
}

/// Front members with named parameters and objectives.
pub fn front_json(space: &ParamSpace, objectives: &[Objective], front: &[TrialRecord]) -> Vec<u8> {
    let members: Vec<Value> = front
        .iter()
        .map(|t| {
            let objs: serde_json::Map<String, Value> =
                objectives.iter().zip(&t.objectives).map(|(o, v)| (o.name.clone(), json!(v))).collect();
            json!({ "number": t.number, "params": space.to_json(&t.params), "objectives": objs })
        })
        .collect();
    let doc = json!({ "objectives": objectives, "front": members });
    let mut out = serde_json::to_vec_pretty(&doc).expect("front serializes");
    out.push(b'\n');
    out
}
