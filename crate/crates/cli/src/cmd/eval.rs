use std::ops::Range;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use msa_core::learn::{
    evaluate, mean_baseline, per_length_csv, Checkpoint, EvalMode, LengthMetric, Model, Value,
};
use serde::Deserialize;

use crate::config::{self, overlay};
use crate::failure::{CliResult, Context, Failure};
use crate::io;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Mse,
    Rounded,
    Units,
}

impl From<ModeArg> for EvalMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Mse => EvalMode::Mse,
            ModeArg::Rounded => EvalMode::Rounded,
            ModeArg::Units => EvalMode::Units,
        }
    }
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalArgs {
    /// Trained checkpoint to evaluate.
    #[arg(long, conflicts_with = "baseline")]
    pub checkpoint: Option<PathBuf>,
    /// Evaluate the constant mean-target predictor instead of a checkpoint.
    #[arg(long)]
    pub baseline: Option<bool>,
    /// JSONL file to evaluate on.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// JSONL file whose mean target the baseline predicts (default: --data).
    #[arg(long)]
    pub fit: Option<PathBuf>,
    /// Defaults to the checkpoint task's accuracy, or MSE.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Predicts one fixed value for every input.
#[derive(Clone)]
struct Constant(Value);

impl Model for Constant {
    fn vocab(&self) -> usize {
        usize::MAX
    }

    fn params(&self) -> &[f64] {
        &[]
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut []
    }

    fn param_groups(&self) -> Vec<(&'static str, Range<usize>)> {
        Vec::new()
    }

    fn predict(&self, _seq: &[usize]) -> msa_core::Result<Value> {
        Ok(self.0)
    }

    fn accumulate_gradient(
        &self,
        _seq: &[usize],
        target: Value,
        _scale: f64,
        _grad: &mut [f64],
    ) -> msa_core::Result<f64> {
        Ok(self.0.squared_error(target))
    }
}

pub fn run(mut args: EvalArgs, config: Option<&Path>) -> CliResult {
    overlay!(args, config::load::<EvalArgs>(config)?; checkpoint, baseline, data, fit, mode, seed, out);
    let data_path = io::require(args.data, "data")?;
    let data = io::read_dataset(&data_path)?;
    let rows: Vec<LengthMetric> = if args.baseline.unwrap_or(false) {
        let fit = match &args.fit {
            Some(p) => io::read_dataset(p)?,
            None => data.clone(),
        };
        let base = mean_baseline(&fit)?;
        let mode = args.mode.map_or(EvalMode::Mse, EvalMode::from);
        evaluate(&Constant(base.prediction), &data, mode)?
    } else {
        let path = args
            .checkpoint
            .ok_or_else(|| Failure::usage("pass --checkpoint PATH or --baseline true"))?;
        let text = std::fs::read_to_string(&path).context(format!("reading {}", path.display()))?;
        let ckpt = Checkpoint::from_json(&text).context(format!("parsing {}", path.display()))?;
        let model = ckpt.to_model()?;
        let mode = args.mode.map(EvalMode::from).unwrap_or_else(|| {
            ckpt.config
                .as_ref()
                .and_then(|c| c.task.accuracy_mode())
                .unwrap_or(EvalMode::Mse)
        });
        evaluate(&model, &data, mode)?
    };
    if rows.iter().any(|r| !r.value.is_finite()) {
        return Err(Failure::Numeric(anyhow::anyhow!(
            "evaluation produced a non-finite metric"
        )));
    }
    let csv = per_length_csv(&rows);
    match &args.out {
        Some(dir) => {
            let path = io::write_text(dir, "eval.csv", &csv)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}
