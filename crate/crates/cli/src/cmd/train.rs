use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use msa_core::learn::{
    metrics_csv, train_restarts, AnyModel, Checkpoint, ComplexMultisetModel, DeepSetsBaseline,
    Head, Model, Provenance, Splits, Task, TrainConfig, DIGIT_VOCAB,
};
use msa_core::seeds::SeedStreams;
use serde::{Deserialize, Serialize};

use crate::config::{self, overlay};
use crate::failure::{CliResult, Context, Failure};
use crate::io::{self, parse_task};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Complex,
    Deepsets,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum HeadArg {
    Dense,
    SumReal,
    SumComplex,
}

impl From<HeadArg> for Head {
    fn from(h: HeadArg) -> Self {
        match h {
            HeadArg::Dense => Head::Dense,
            HeadArg::SumReal => Head::SumReal,
            HeadArg::SumComplex => Head::SumComplex,
        }
    }
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainArgs {
    /// Directory holding train.jsonl, optionally dev.jsonl and metadata.json.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Task id; read from the data's metadata.json when omitted.
    #[arg(long, value_parser = parse_task)]
    pub task: Option<Task>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// States of the complex model (default 50 for digit tasks, the generator's d for task 0).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    pub head: Option<HeadArg>,
    /// Learn the initial weights λ (default on for task 0 only).
    #[arg(long)]
    pub learn_lambda: Option<bool>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Epochs without improvement before the learning rate halves; 0 disables decay.
    #[arg(long)]
    pub decay_patience: Option<usize>,
    #[arg(long)]
    pub stop_patience: Option<usize>,
    /// Independent runs; the one with the lowest monitored loss is kept.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Stop restarting once a run's monitored loss is at most this.
    #[arg(long)]
    pub good_enough: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(mut args: TrainArgs, config: Option<&Path>) -> CliResult {
    overlay!(args, config::load::<TrainArgs>(config)?;
        data, task, model, k, head, learn_lambda, epochs, lr, batch_size, decay_patience,
        stop_patience, restarts, good_enough, seed, out);
    let data = args.data.unwrap_or_else(|| PathBuf::from("data"));
    let meta = read_metadata(&data)?;
    let task = match (args.task, &meta) {
        (Some(t), _) => t,
        (None, Some(m)) => parse_task(&m.task).map_err(Failure::usage)?,
        (None, None) => {
            return Err(Failure::usage(
                "missing --task and no metadata.json in the data directory",
            ))
        }
    };
    let seed = args.seed.unwrap_or(0);
    let out = args.out.unwrap_or_else(|| PathBuf::from("run"));

    let splits = Splits {
        train: io::read_dataset(&data.join("train.jsonl"))?,
        dev: io::read_optional_dataset(&data.join("dev.jsonl"))?,
        test: Default::default(),
        provenance: Provenance {
            generator: meta
                .as_ref()
                .map(|m| m.generator.clone())
                .unwrap_or_default(),
            seed,
            params: Default::default(),
        },
    };

    let digits = matches!(task, Task::DigitSum | Task::UnitsDigit);
    let mut cfg = if digits {
        TrainConfig::digits(task, seed)
    } else {
        TrainConfig::recovery(task, seed)
    };
    if let Some(e) = args.epochs {
        cfg.max_epochs = e;
    }
    if let Some(lr) = args.lr {
        cfg.lr = lr;
    }
    if let Some(b) = args.batch_size {
        cfg.batch_size = b;
    }
    if let Some(p) = args.decay_patience {
        cfg.decay_patience = (p > 0).then_some(p);
    }
    if let Some(p) = args.stop_patience {
        cfg.stop_patience = p;
    }

    let vocab = if digits {
        DIGIT_VOCAB
    } else {
        splits
            .train
            .examples
            .iter()
            .chain(&splits.dev.examples)
            .flat_map(|e| e.seq.iter().copied())
            .max()
            .map_or(1, |s| s + 1)
    };
    let kind = args.model.unwrap_or(ModelKind::Complex);
    let generator_d = meta.as_ref().and_then(|m| m.params.get("d")?.as_u64());
    let k = match args.k {
        Some(k) => k,
        None if digits => 50,
        None => generator_d.map_or(4, |d| d as usize),
    };
    let head = args.head.map(Head::from).unwrap_or(match task {
        Task::Task0Unary => Head::SumReal,
        Task::Task0Diag => Head::SumComplex,
        _ => Head::Dense,
    });
    let learn_lambda = args.learn_lambda.unwrap_or(!digits);
    let streams = SeedStreams::new(seed);
    let make = |i: usize| {
        let mut rng = streams.child("restart", i as u64).rng("init");
        Ok(match kind {
            ModelKind::Complex => AnyModel::Complex(ComplexMultisetModel::new(
                vocab,
                k,
                head,
                learn_lambda,
                &mut rng,
            )?),
            ModelKind::Deepsets => AnyModel::DeepSets(DeepSetsBaseline::standard(vocab, &mut rng)?),
        })
    };

    let restarts = args.restarts.unwrap_or(1);
    let outcome = train_restarts(make, restarts, &splits, &cfg, args.good_enough)?;
    let best = outcome.best;
    let monitor = if splits.dev.is_empty() {
        "train_eval"
    } else {
        "dev"
    };
    let dev_metric = best.best_monitor.is_finite().then_some(best.best_monitor);
    let checkpoint = Checkpoint::new(&best.model, Some(cfg.clone()), best.best_epoch, dev_metric);
    let ckpt_path = io::write_text(&out, "checkpoint.json", &(checkpoint.to_json()? + "\n"))
        .context("saving checkpoint")?;
    io::write_text(&out, "metrics.csv", &metrics_csv(&best.metrics, monitor))?;

    let accuracy = best
        .metrics
        .iter()
        .find(|m| m.epoch == best.best_epoch)
        .and_then(|m| m.dev_accuracy);
    println!(
        "{} parameters; best of {} run(s) is run {}, epoch {} with {monitor} MSE {}{}",
        best.model.num_params(),
        outcome.runs,
        outcome.best_run,
        best.best_epoch,
        dev_metric.map_or("n/a".to_string(), |m| format!("{m:.6}")),
        accuracy.map_or(String::new(), |a| format!(", dev accuracy {a:.4}")),
    );
    println!("checkpoint: {}", ckpt_path.display());
    Ok(())
}

#[derive(Deserialize)]
struct DataMetadata {
    generator: String,
    task: String,
    #[serde(default)]
    params: std::collections::BTreeMap<String, serde_json::Value>,
}

fn read_metadata(data: &Path) -> CliResult<Option<DataMetadata>> {
    let path = data.join("metadata.json");
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).context(format!("reading {}", path.display()))?;
    Ok(Some(
        serde_json::from_str(&text).context(format!("parsing {}", path.display()))?,
    ))
}
