use std::fmt::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::eval::{evaluate, EvalMode};
use super::{batch_gradient, mean_squared_error, Adam, Example, Model, Splits};
use crate::error::{Error, Result};
use crate::seeds::SeedStreams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    /// Recover a unary automaton with orthogonal transitions.
    #[serde(rename = "0u")]
    Task0Unary,
    /// Recover a complex diagonal automaton.
    #[serde(rename = "0d")]
    Task0Diag,
    /// Sum of digits.
    #[serde(rename = "1")]
    DigitSum,
    /// Units digit of the sum.
    #[serde(rename = "2")]
    UnitsDigit,
}

impl Task {
    /// The accuracy reported alongside the loss, if any.
    pub fn accuracy_mode(self) -> Option<EvalMode> {
        match self {
            Task::Task0Unary | Task::Task0Diag => None,
            Task::DigitSum => Some(EvalMode::Rounded),
            Task::UnitsDigit => Some(EvalMode::Units),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub task: Task,
    pub lr: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Factor applied to the learning rate after `decay_patience` epochs
    /// without improvement.
    pub lr_decay: f64,
    /// `None` disables learning-rate decay.
    pub decay_patience: Option<usize>,
    pub stop_patience: usize,
    pub seed: u64,
}

impl TrainConfig {
    /// Defaults for the digit tasks.
    ///
    /// The digit sum uses Adam at 1e-3 in batches of 128, halving the rate
    /// after 2 stagnant epochs and stopping after 10. The units digit is
    /// learned in stages, one frequency of the mod-10 cycle at a time, with
    /// plateaus of 5 to 15 epochs in between; it uses 1e-2 in batches of 32,
    /// halving after 10 stagnant epochs and stopping after 25.
    pub fn digits(task: Task, seed: u64) -> Self {
        let base = Self {
            task,
            lr: 1e-3,
            batch_size: 128,
            max_epochs: 200,
            lr_decay: 0.5,
            decay_patience: Some(2),
            stop_patience: 10,
            seed,
        };
        match task {
            Task::UnitsDigit => Self {
                lr: 1e-2,
                batch_size: 32,
                max_epochs: 100,
                decay_patience: Some(10),
                stop_patience: 25,
                ..base
            },
            _ => base,
        }
    }

    /// Full-batch training for up to 30k epochs, stopping after 100 without
    /// improvement.
    pub fn recovery(task: Task, seed: u64) -> Self {
        Self {
            task,
            lr: 1e-2,
            batch_size: usize::MAX,
            max_epochs: 30_000,
            lr_decay: 0.5,
            decay_patience: None,
            stop_patience: 100,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.lr > 0.0
            && self.lr.is_finite()
            && self.batch_size > 0
            && self.lr_decay > 0.0
            && self.lr_decay <= 1.0;
        if ok && self.decay_patience != Some(0) && self.stop_patience > 0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "training hyperparameters must be positive: {self:?}"
            )))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    /// Mean batch loss during the epoch.
    pub train_loss: f64,
    /// Loss used for model selection: dev MSE, or training MSE after the
    /// epoch when there is no dev split.
    pub monitor_loss: f64,
    pub dev_accuracy: Option<f64>,
    pub lr: f64,
}

pub const METRICS_CSV_HEADER: &str = "epoch,split,loss,accuracy";

impl EpochMetrics {
    /// CSV rows for the training loss and the monitored loss.
    pub fn csv_rows(&self, monitor_split: &str) -> String {
        let acc = self.dev_accuracy.map(|a| a.to_string()).unwrap_or_default();
        format!(
            "{},train,{},\n{},{monitor_split},{},{acc}\n",
            self.epoch, self.train_loss, self.epoch, self.monitor_loss
        )
    }
}

pub fn metrics_csv(metrics: &[EpochMetrics], monitor_split: &str) -> String {
    let mut out = format!("{METRICS_CSV_HEADER}\n");
    for m in metrics {
        write!(out, "{}", m.csv_rows(monitor_split)).expect("writing to a String");
    }
    out
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<M> {
    /// Parameters from the epoch with the lowest monitored loss.
    pub model: M,
    pub metrics: Vec<EpochMetrics>,
    pub best_epoch: usize,
    pub best_monitor: f64,
}

/// Minimizes mean squared error with Adam.
///
/// Each epoch visits the training set in a seeded random order. The monitored
/// loss is the dev MSE, or the training MSE when there is no dev split. The
/// learning rate is multiplied by `lr_decay` after `decay_patience` epochs
/// without a new best, and training stops after `stop_patience` such epochs
/// or `max_epochs`. Returns the best model seen.
pub fn train<M: Model>(model: M, splits: &Splits, cfg: &TrainConfig) -> Result<TrainOutcome<M>> {
    train_with_callback(model, splits, cfg, |_| {})
}

pub fn train_with_callback<M: Model>(
    mut model: M,
    splits: &Splits,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<TrainOutcome<M>> {
    cfg.validate()?;
    let train_set = &splits.train.examples;
    if train_set.is_empty() {
        return Err(Error::InvalidArgument("training split is empty".into()));
    }
    let has_dev = !splits.dev.is_empty();
    let accuracy_mode = cfg.task.accuracy_mode().filter(|_| has_dev);

    let mut rng = SeedStreams::new(cfg.seed).rng("shuffle");
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut opt = Adam::new(model.num_params(), cfg.lr);
    let mut outcome = TrainOutcome {
        model: model.clone(),
        metrics: Vec::new(),
        best_epoch: 0,
        best_monitor: f64::INFINITY,
    };
    let (mut stale, mut decay_stale) = (0, 0);

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for (batch, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let examples: Vec<&Example> = chunk.iter().map(|&i| &train_set[i]).collect();
            let (loss, grad) = batch_gradient(&model, &examples)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: Some(batch),
                    lr: opt.lr,
                });
            }
            opt.step(model.params_mut(), &grad);
            loss_sum += loss * chunk.len() as f64;
        }
        let monitor_loss =
            mean_squared_error(&model, if has_dev { &splits.dev } else { &splits.train })?;
        if !monitor_loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                batch: None,
                lr: opt.lr,
            });
        }
        let dev_accuracy = match accuracy_mode {
            Some(mode) => {
                let rows = evaluate(&model, &splits.dev, mode)?;
                let total: usize = rows.iter().map(|r| r.count).sum();
                Some(rows.iter().map(|r| r.value * r.count as f64).sum::<f64>() / total as f64)
            }
            None => None,
        };
        let m = EpochMetrics {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            monitor_loss,
            dev_accuracy,
            lr: opt.lr,
        };
        on_epoch(&m);
        outcome.metrics.push(m);

        if monitor_loss < outcome.best_monitor {
            outcome.best_monitor = monitor_loss;
            outcome.best_epoch = epoch;
            outcome.model = model.clone();
            stale = 0;
            decay_stale = 0;
        } else {
            stale += 1;
            decay_stale += 1;
            if cfg.decay_patience.is_some_and(|p| decay_stale >= p) {
                opt.lr *= cfg.lr_decay;
                decay_stale = 0;
            }
            if stale >= cfg.stop_patience {
                break;
            }
        }
    }
    Ok(outcome)
}

/// The best of several independently initialized runs.
#[derive(Clone, Debug)]
pub struct RestartOutcome<M> {
    pub best: TrainOutcome<M>,
    /// Index of the run that produced `best`.
    pub best_run: usize,
    pub runs: usize,
}

/// Trains `make(i)` for `i = 0..max_runs`, run `i` shuffling with seed
/// `cfg.seed + i`, and keeps the run with the lowest monitored loss. Stops
/// early once a run's monitored loss is at most `good_enough`.
pub fn train_restarts<M: Model>(
    mut make: impl FnMut(usize) -> Result<M>,
    max_runs: usize,
    splits: &Splits,
    cfg: &TrainConfig,
    good_enough: Option<f64>,
) -> Result<RestartOutcome<M>> {
    if max_runs == 0 {
        return Err(Error::InvalidArgument("at least one run is needed".into()));
    }
    let mut best: Option<(TrainOutcome<M>, usize)> = None;
    let mut runs = 0;
    for i in 0..max_runs {
        let run_cfg = TrainConfig {
            seed: cfg.seed.wrapping_add(i as u64),
            ..cfg.clone()
        };
        let out = train(make(i)?, splits, &run_cfg)?;
        runs += 1;
        let done = good_enough.is_some_and(|g| out.best_monitor <= g);
        if best
            .as_ref()
            .is_none_or(|(b, _)| out.best_monitor < b.best_monitor)
        {
            best = Some((out, i));
        }
        if done {
            break;
        }
    }
    let (best, best_run) = best.expect("at least one run");
    Ok(RestartOutcome {
        best,
        best_run,
        runs,
    })
}
