use std::collections::BTreeMap;
use std::fmt::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Dataset, Model, Value};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Mean squared error.
    Mse,
    /// Fraction with `round(pred) == target`.
    Rounded,
    /// Fraction with `round(pred) mod 10 == target`.
    Units,
}

impl EvalMode {
    fn score(self, pred: Value, target: Value) -> f64 {
        let rounded = pred.re().round();
        match self {
            EvalMode::Mse => pred.squared_error(target),
            EvalMode::Rounded => f64::from(u8::from(rounded == target.re())),
            EvalMode::Units => f64::from(u8::from(rounded.rem_euclid(10.0) == target.re())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthMetric {
    pub length: usize,
    pub count: usize,
    pub value: f64,
}

/// The metric averaged within each input length, in increasing length order.
pub fn evaluate<M: Model>(model: &M, data: &Dataset, mode: EvalMode) -> Result<Vec<LengthMetric>> {
    let scores: Vec<(usize, f64)> = data
        .examples
        .par_iter()
        .map(|ex| Ok((ex.seq.len(), mode.score(model.predict(&ex.seq)?, ex.target))))
        .collect::<Result<_>>()?;
    let mut groups: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for (len, s) in scores {
        let g = groups.entry(len).or_default();
        g.0 += 1;
        g.1 += s;
    }
    Ok(groups
        .into_iter()
        .map(|(length, (count, sum))| LengthMetric {
            length,
            count,
            value: sum / count as f64,
        })
        .collect())
}

/// CSV with header `length,count,metric`.
pub fn per_length_csv(rows: &[LengthMetric]) -> String {
    let mut out = String::from("length,count,metric\n");
    for r in rows {
        writeln!(out, "{},{},{}", r.length, r.count, r.value).expect("writing to a String");
    }
    out
}

/// The constant predictor equal to the mean training target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanBaseline {
    pub prediction: Value,
    pub mse: f64,
}

/// Mean target and the MSE of predicting it everywhere. Complex targets get
/// the complex mean, so the error counts both parts as the models' loss does.
pub fn mean_baseline(data: &Dataset) -> Result<MeanBaseline> {
    if data.is_empty() {
        return Err(Error::InvalidArgument(
            "mean baseline needs at least one example".into(),
        ));
    }
    let n = data.len() as f64;
    let mean = data
        .examples
        .iter()
        .map(|e| e.target.to_complex())
        .sum::<Complex64>()
        / n;
    let prediction = if data
        .examples
        .iter()
        .any(|e| matches!(e.target, Value::Complex(_)))
    {
        Value::Complex([mean.re, mean.im])
    } else {
        Value::Real(mean.re)
    };
    let mse = data
        .examples
        .iter()
        .map(|e| prediction.squared_error(e.target))
        .sum::<f64>()
        / n;
    Ok(MeanBaseline { prediction, mse })
}
