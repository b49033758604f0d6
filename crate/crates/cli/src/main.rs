//! `msa`: data generation, training, evaluation, theory checks and encoding
//! export for complex-weighted multiset automata.
//!
//! Exit codes: 0 success, 1 usage or IO error, 2 numerical failure,
//! 3 verification violation.

mod cmd;
mod config;
mod failure;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use failure::{CliResult, Failure};

#[derive(Parser, Debug)]
#[command(
    name = "msa",
    version,
    about = "Complex-weighted multiset automata experiments"
)]
struct Cli {
    /// Flat JSON config (with `"version": 1`); flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a dataset as JSONL files plus metadata.
    Gen(cmd::gen::GenArgs),
    /// Train a model; writes checkpoint.json and metrics.csv.
    Train(cmd::train::TrainArgs),
    /// Per-length metrics of a checkpoint or the mean baseline.
    Eval(cmd::eval::EvalArgs),
    /// Run theory checks; exits 3 on any violation.
    Verify(cmd::verify::VerifyArgs),
    /// Export sinusoidal or automaton-generated position encodings as CSV.
    Encode(cmd::encode::EncodeArgs),
    /// Print the worked example automata M1, M2, M3.
    Demo,
}

/// Caps the worker pool when `MSA_THREADS` is set.
fn configure_threads() -> CliResult {
    let Ok(value) = std::env::var("MSA_THREADS") else {
        return Ok(());
    };
    let n: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::usage(format!(
            "MSA_THREADS must be a positive integer, got `{value}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.into()))
}

fn run(cli: Cli) -> CliResult {
    configure_threads()?;
    let config = cli.config.as_deref();
    match cli.command {
        Command::Gen(args) => cmd::gen::run(args, config),
        Command::Train(args) => cmd::train::run(args, config),
        Command::Eval(args) => cmd::eval::run(args, config),
        Command::Verify(args) => cmd::verify::run(args, config),
        Command::Encode(args) => cmd::encode::run(args, config),
        Command::Demo => cmd::demo::run(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
