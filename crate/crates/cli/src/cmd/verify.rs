use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use msa_core::algebra::{self, AlphabetPolicy};
use msa_core::diagonalize::{
    asd_state_count, make_asd, perturb_jordan_nonzero, perturb_jordan_zero, power_error_sweep,
    JordanBlock, PowerErrorReport,
};
use msa_core::learn::symbol_name;
use msa_core::linalg::{self, CMatrix, CRowVector, CVector};
use msa_core::seeds::SeedStreams;
use msa_core::{examples, posenc, Kind, WeightedAutomaton};
use rand::Rng;
use serde::Deserialize;

use crate::config::{self, overlay};
use crate::failure::{CliResult, Failure};
use crate::io;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// Power-error bounds for perturbed Jordan blocks.
    PowerBound,
    /// Automaton-generated encodings against the sinusoidal formula.
    Posenc,
    /// Diagonal construction for a random commuting automaton.
    Asd,
    /// The shuffle of the two small worked examples against the third.
    Examples,
    All,
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub check: Option<Check>,
    /// Matrix size (power-bound, default 3), encoding width (posenc, default 64)
    /// or automaton states (asd, default 2).
    #[arg(long)]
    pub d: Option<usize>,
    /// Largest power checked (power-bound).
    #[arg(long)]
    pub nmax: Option<u64>,
    /// Perturbation budget ε (power-bound).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Decay rate r in (0, 1) for the nilpotent bound (power-bound).
    #[arg(long)]
    pub r: Option<f64>,
    /// Positions compared (posenc).
    #[arg(long)]
    pub positions: Option<usize>,
    /// Alphabet size (asd).
    #[arg(long)]
    pub m: Option<usize>,
    /// Largest multiset size enumerated in equivalence checks.
    #[arg(long)]
    pub max_size: Option<usize>,
    /// Tolerance for equality checks.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Row {
    check: &'static str,
    case: String,
    measured: f64,
    bound: f64,
    pass: bool,
}

const HEADER: &str = "check,case,measured,bound,pass";

pub fn run(mut args: VerifyArgs, config: Option<&Path>) -> CliResult {
    overlay!(args, config::load::<VerifyArgs>(config)?;
        check, d, nmax, eps, r, positions, m, max_size, tol, seed, out);
    let check = args.check.unwrap_or(Check::All);
    let seed = args.seed.unwrap_or(0);
    let mut rows = Vec::new();
    let mut sweeps = BTreeMap::new();
    let wants = |c: Check| check == c || check == Check::All;

    if wants(Check::PowerBound) {
        let d = args.d.unwrap_or(3);
        let nmax = args.nmax.unwrap_or(50);
        let eps = args.eps.unwrap_or(1e-3);
        let r = args.r.unwrap_or(0.5);
        let mut rng = SeedStreams::new(seed).rng("eigenvalue");
        let eigenvalue = linalg::c(rng.random_range(0.5..1.2), 0.0)
            * linalg::c(0.0, rng.random_range(0.0..TAU)).exp();
        let block = JordanBlock::new(eigenvalue, d);
        let e = perturb_jordan_nonzero(&block, eps, seed)?;
        let nonzero = power_error_sweep(&block.matrix(), &e, nmax, r, eps)?;
        let e = perturb_jordan_zero(d, eps, r, seed)?;
        let nilpotent = power_error_sweep(&JordanBlock::nilpotent(d).matrix(), &e, nmax, r, eps)?;
        for (name, reports) in [("nonzero", &nonzero), ("nilpotent", &nilpotent)] {
            for rep in reports {
                rows.push(Row {
                    check: "power-bound",
                    case: format!("{name} d={d} n={}", rep.n),
                    measured: if name == "nonzero" {
                        rep.rel_err.unwrap_or(rep.abs_err)
                    } else {
                        rep.abs_err
                    },
                    bound: rep.bound,
                    pass: !rep.violated,
                });
            }
        }
        sweeps.insert("power_nonzero.csv", nonzero);
        sweeps.insert("power_nilpotent.csv", nilpotent);
    }

    if wants(Check::Posenc) {
        let d = args.d.unwrap_or(64);
        let positions = args.positions.unwrap_or(200);
        let tol = args.tol.unwrap_or(1e-9);
        let cmp = posenc::compare_with_sinusoidal(d, positions)?;
        rows.push(Row {
            check: "posenc",
            case: format!("d={d} positions 1..={positions}"),
            measured: cmp.max_deviation,
            bound: tol,
            pass: cmp.max_deviation <= tol,
        });
    }

    if wants(Check::Asd) {
        let d = args.d.unwrap_or(2);
        let m = args.m.unwrap_or(1);
        let max_size = args.max_size.unwrap_or(6);
        let tol = args.tol.unwrap_or(1e-6);
        let original = random_commuting(d, m, seed)?;
        let asd = make_asd(&original, msa_core::automaton::DEFAULT_COMMUTE_TOL)?;
        let expected = asd_state_count(m, d)?;
        rows.push(Row {
            check: "asd",
            case: format!("state count m={m} d={d}"),
            measured: asd.dim() as f64,
            bound: expected as f64,
            pass: asd.dim() as u128 == expected,
        });
        let eq = algebra::equivalent(&original, &asd, max_size, tol)?;
        rows.push(Row {
            check: "asd",
            case: format!(
                "equivalence up to size {max_size} ({} multisets)",
                eq.checked
            ),
            measured: eq.max_deviation,
            bound: tol,
            pass: eq.equivalent,
        });
    }

    if wants(Check::Examples) {
        let max_size = args.max_size.unwrap_or(9);
        let tol = args.tol.unwrap_or(1e-12);
        let product = algebra::shuffle(
            &examples::m2(),
            &examples::m1(),
            AlphabetPolicy::PadWithZeros,
        )?;
        let eq = algebra::equivalent(&product, &examples::m3(), max_size, tol)?;
        rows.push(Row {
            check: "examples",
            case: format!("shuffle(M2, M1) vs M3 up to size {max_size}"),
            measured: eq.max_deviation,
            bound: tol,
            pass: eq.equivalent,
        });
    }

    let mut csv = format!("{HEADER}\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{},{:e},{:e},{}",
            r.check, r.case, r.measured, r.bound, r.pass
        )
        .expect("writing to a String");
    }
    match &args.out {
        Some(dir) => {
            io::write_text(dir, "verify.csv", &csv)?;
            for (name, reports) in &sweeps {
                io::write_text(dir, name, &sweep_csv(reports))?;
            }
        }
        None => print!("{csv}"),
    }

    let failed: Vec<&Row> = rows.iter().filter(|r| !r.pass).collect();
    eprintln!("{} checks, {} failed", rows.len(), failed.len());
    match failed.first() {
        None => Ok(()),
        Some(first) => Err(Failure::Violation(format!(
            "{} of {} checks failed; first: {} {} measured {:e} against bound {:e}",
            failed.len(),
            rows.len(),
            first.check,
            first.case,
            first.measured,
            first.bound
        ))),
    }
}

fn sweep_csv(reports: &[PowerErrorReport]) -> String {
    let mut out = format!("{}\n", PowerErrorReport::CSV_HEADER);
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// `μ(s) = αₛI + βₛT + γₛT²` for one random upper-triangular `T`, so every
/// pair of transitions commutes while `T` keeps them non-diagonal.
fn random_commuting(d: usize, m: usize, seed: u64) -> CliResult<WeightedAutomaton> {
    if d == 0 || m == 0 {
        return Err(Failure::usage("--d and --m must be positive"));
    }
    let mut rng = SeedStreams::new(seed).rng("automaton");
    let mut draw = |scale: f64| {
        linalg::c(
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
        )
    };
    let t = CMatrix::from_fn(d, d, |i, j| if j >= i { draw(0.5) } else { linalg::ZERO });
    let t2 = &t * &t;
    let eye = CMatrix::identity(d, d);
    let mut mu = BTreeMap::new();
    for s in 0..m {
        let (a, b, c) = (draw(1.0), draw(1.0), draw(0.5));
        mu.insert(
            symbol_name(s),
            eye.map(|x| x * a) + t.map(|x| x * b) + t2.map(|x| x * c),
        );
    }
    let lambda = CRowVector::from_fn(d, |_, _| draw(1.0));
    let rho = CVector::from_fn(d, |_, _| draw(1.0));
    Ok(WeightedAutomaton::new(lambda, mu, rho, Kind::Multiset)?)
}
