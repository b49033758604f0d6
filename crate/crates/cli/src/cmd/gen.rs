use std::path::{Path, PathBuf};

use clap::Args;
use msa_core::learn::{
    gen_digitsum_with, gen_task0_diag, gen_task0_unary, Splits, Task, DEFAULT_TEST_PER_LENGTH,
};
use serde::{Deserialize, Serialize};

use crate::config::{self, overlay};
use crate::failure::CliResult;
use crate::io::{self, parse_task, require};

#[derive(Args, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenArgs {
    /// 0u (unary automaton), 0d (diagonal automaton), 1 (digit sum) or 2 (units digit).
    #[arg(long, value_parser = parse_task)]
    pub task: Option<Task>,
    /// Training examples for the digit tasks.
    #[arg(long)]
    pub n: Option<usize>,
    /// Test examples per length for the digit tasks.
    #[arg(long)]
    pub test_per_length: Option<usize>,
    /// States of the generating automaton (task 0).
    #[arg(long)]
    pub d: Option<usize>,
    /// Symbols of the diagonal automaton (task 0d).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Metadata<'a> {
    generator: &'a str,
    task: String,
    seed: u64,
    params: &'a std::collections::BTreeMap<String, serde_json::Value>,
    counts: Counts,
}

#[derive(Serialize)]
struct Counts {
    train: usize,
    dev: usize,
    test: usize,
}

pub fn run(mut args: GenArgs, config: Option<&Path>) -> CliResult {
    overlay!(args, config::load::<GenArgs>(config)?; task, n, test_per_length, d, m, seed, out);
    let task = require(args.task, "task")?;
    let seed = args.seed.unwrap_or(0);
    let out = args.out.unwrap_or_else(|| PathBuf::from("data"));
    let d = args.d.unwrap_or(4);

    let (splits, automaton_json) = match task {
        Task::Task0Unary => {
            let (m, splits) = gen_task0_unary(d, seed)?;
            (splits, Some(m.to_json()?))
        }
        Task::Task0Diag => {
            let (m, splits) = gen_task0_diag(d, args.m.unwrap_or(5), seed)?;
            (splits, Some(m.to_weighted().to_json()?))
        }
        Task::DigitSum | Task::UnitsDigit => {
            let n = args.n.unwrap_or(20_000);
            let per_length = args.test_per_length.unwrap_or(DEFAULT_TEST_PER_LENGTH);
            let splits = gen_digitsum_with(n, per_length, seed, task == Task::UnitsDigit)?;
            (splits, None)
        }
    };
    write_splits(&out, &splits)?;
    if let Some(json) = automaton_json {
        io::write_text(&out, "automaton.json", &(json + "\n"))?;
    }
    io::write_json(
        &out,
        "metadata.json",
        &Metadata {
            generator: &splits.provenance.generator,
            task: io::task_name(task),
            seed,
            params: &splits.provenance.params,
            counts: Counts {
                train: splits.train.len(),
                dev: splits.dev.len(),
                test: splits.test.len(),
            },
        },
    )?;
    println!(
        "wrote {} train, {} dev, {} test examples to {}",
        splits.train.len(),
        splits.dev.len(),
        splits.test.len(),
        out.display()
    );
    Ok(())
}

/// Empty splits are not written; task 0 has only a training set.
fn write_splits(out: &Path, splits: &Splits) -> CliResult {
    for (name, data) in [
        ("train", &splits.train),
        ("dev", &splits.dev),
        ("test", &splits.test),
    ] {
        if !data.is_empty() {
            io::write_dataset(out, &format!("{name}.jsonl"), data)?;
        }
    }
    Ok(())
}
