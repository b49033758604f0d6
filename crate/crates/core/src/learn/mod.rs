//! Trainable multiset models and the digit-sum and automaton-recovery tasks.
//!
//! Models map a multiset of symbol indices, given as a sequence, to a real or
//! complex value and are trained on squared error. Parameters live in one
//! flat vector per model so the optimizer, gradient checker and checkpoints
//! treat every model alike.

mod adam;
mod checkpoint;
mod complex_model;
mod data;
mod deepsets;
mod eval;
mod gradcheck;
mod logpolar;
mod train;

use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use adam::Adam;
pub use checkpoint::{AnyModel, Checkpoint, ModelSpec};
pub use complex_model::{ComplexMultisetModel, Head};
pub use data::{
    gen_digitsum, gen_digitsum_with, gen_task0_diag, gen_task0_unary, haar_orthogonal,
    haar_orthogonal_with, read_jsonl, symbol_name, write_jsonl, Dataset, Example, Provenance,
    Splits, DEFAULT_TEST_PER_LENGTH, DIGIT_VOCAB, MAX_TRAIN_LENGTH, TEST_LENGTHS,
};
pub use deepsets::{Activation, DeepSetsBaseline};
pub use eval::{evaluate, mean_baseline, per_length_csv, EvalMode, LengthMetric, MeanBaseline};
pub use gradcheck::{grad_check, grad_check_subsample};
pub use logpolar::{logpolar_mul, LogPolarComplex};
pub use train::{
    metrics_csv, train, train_restarts, train_with_callback, EpochMetrics, RestartOutcome, Task,
    TrainConfig, TrainOutcome, METRICS_CSV_HEADER,
};

/// A target or prediction: real, or complex stored as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Complex([f64; 2]),
}

impl Value {
    pub fn to_complex(self) -> Complex64 {
        match self {
            Value::Real(x) => Complex64::new(x, 0.0),
            Value::Complex([re, im]) => Complex64::new(re, im),
        }
    }

    pub fn re(self) -> f64 {
        self.to_complex().re
    }

    pub fn is_finite(self) -> bool {
        let z = self.to_complex();
        z.re.is_finite() && z.im.is_finite()
    }

    /// `|self − other|²`, treating real values as complex with zero imaginary part.
    pub fn squared_error(self, other: Value) -> f64 {
        (self.to_complex() - other.to_complex()).norm_sqr()
    }
}

/// A differentiable model over multisets of symbol indices `0..vocab`.
pub trait Model: Clone + Send + Sync {
    fn vocab(&self) -> usize;

    fn params(&self) -> &[f64];

    fn params_mut(&mut self) -> &mut [f64];

    /// Named contiguous slices of [`Model::params`], in layout order.
    fn param_groups(&self) -> Vec<(&'static str, Range<usize>)>;

    fn predict(&self, seq: &[usize]) -> Result<Value>;

    /// Adds `scale · ∇|predict(seq) − target|²` to `grad` and returns the
    /// unscaled squared error.
    fn accumulate_gradient(
        &self,
        seq: &[usize],
        target: Value,
        scale: f64,
        grad: &mut [f64],
    ) -> Result<f64>;

    fn num_params(&self) -> usize {
        self.params().len()
    }

    fn check_symbols(&self, seq: &[usize]) -> Result<()> {
        match seq.iter().find(|&&s| s >= self.vocab()) {
            Some(s) => Err(Error::UnknownSymbol(format!(
                "{s} (vocabulary size {})",
                self.vocab()
            ))),
            None => Ok(()),
        }
    }
}

/// Examples per work unit when gradients are computed in parallel. Fixed so
/// the reduction order, and thus the result, does not depend on thread count.
const GRADIENT_CHUNK: usize = 16;

/// Mean squared error and its gradient over `examples`, reduced in index order.
pub fn batch_gradient<M: Model>(model: &M, examples: &[&Example]) -> Result<(f64, Vec<f64>)> {
    let n = examples.len();
    let mut grad = vec![0.0; model.num_params()];
    if n == 0 {
        return Ok((0.0, grad));
    }
    let scale = 1.0 / n as f64;
    let partials: Vec<Result<(f64, Vec<f64>)>> = examples
        .par_chunks(GRADIENT_CHUNK)
        .map(|chunk| {
            let mut g = vec![0.0; model.num_params()];
            let mut loss = 0.0;
            for ex in chunk {
                loss += model.accumulate_gradient(&ex.seq, ex.target, scale, &mut g)?;
            }
            Ok((loss, g))
        })
        .collect();
    let mut loss = 0.0;
    for part in partials {
        let (l, g) = part?;
        loss += l;
        for (acc, x) in grad.iter_mut().zip(&g) {
            *acc += x;
        }
    }
    Ok((loss * scale, grad))
}

/// Mean squared error over a dataset, reduced in index order.
pub fn mean_squared_error<M: Model>(model: &M, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let errs: Vec<f64> = data
        .examples
        .par_iter()
        .map(|ex| Ok(model.predict(&ex.seq)?.squared_error(ex.target)))
        .collect::<Result<_>>()?;
    Ok(errs.iter().sum::<f64>() / errs.len() as f64)
}
