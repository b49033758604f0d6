use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use msa_core::posenc::{self, UNARY_SYMBOL};
use serde::Deserialize;

use crate::config::{self, overlay};
use crate::failure::{CliResult, Failure};
use crate::io;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodeMode {
    /// The closed-form sin/cos formula.
    Sinusoidal,
    /// Forward weights of the equivalent unary automaton, step by step.
    Automaton,
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EncodeArgs {
    #[arg(long, value_enum)]
    pub mode: Option<EncodeMode>,
    /// Encoding width (even).
    #[arg(long)]
    pub d: Option<usize>,
    /// Number of positions, starting at 1.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(mut args: EncodeArgs, config: Option<&Path>) -> CliResult {
    overlay!(args, config::load::<EncodeArgs>(config)?; mode, d, n, seed, out);
    let mode = args.mode.unwrap_or(EncodeMode::Sinusoidal);
    let d = args.d.unwrap_or(4);
    let n = args.n.unwrap_or(10);
    let rows = match mode {
        EncodeMode::Sinusoidal => (1..=n)
            .map(|p| posenc::sinusoidal_encoding(p, d))
            .collect::<msa_core::Result<Vec<_>>>()?,
        EncodeMode::Automaton => automaton_rows(d, n)?,
    };
    let mut csv = (0..d)
        .map(|j| format!("x{j}"))
        .collect::<Vec<_>>()
        .join(",");
    csv.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        writeln!(csv, "{}", cells.join(",")).expect("writing to a String");
    }
    match &args.out {
        Some(dir) => {
            let name = match mode {
                EncodeMode::Sinusoidal => "encoding_sinusoidal.csv",
                EncodeMode::Automaton => "encoding_automaton.csv",
            };
            io::write_text(dir, name, &csv)?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

/// Real parts of `λμ^(p−1)` for `p = 1..=n`.
fn automaton_rows(d: usize, n: usize) -> CliResult<Vec<Vec<f64>>> {
    let m = posenc::polar_automaton(&posenc::transformer_params(d)?)?;
    let mu = m
        .mu(UNARY_SYMBOL)
        .ok_or_else(|| Failure::usage("encoding automaton lacks its symbol"))?;
    let mut fw = m.lambda().clone();
    let mut rows = Vec::with_capacity(n);
    for p in 1..=n {
        if p > 1 {
            fw = &fw * mu;
        }
        rows.push(fw.iter().map(|z| z.re).collect());
    }
    Ok(rows)
}
