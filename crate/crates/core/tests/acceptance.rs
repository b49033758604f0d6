//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.
//!
//! `ACCEPTANCE_ONLY=2,5` runs a subset.

mod common;

use std::time::{Duration, Instant};

use common::*;
use msa_core::algebra::{self, AlphabetPolicy};
use msa_core::diagonalize::{
    asd_state_count, make_asd, perturb_jordan_nonzero, perturb_jordan_zero, power_error_sweep,
    JordanBlock,
};
use msa_core::examples::{m1, m2, m3};
use msa_core::learn::{
    evaluate, gen_digitsum, gen_task0_diag, gen_task0_unary, grad_check, logpolar_mul,
    mean_baseline, mean_squared_error, train, train_restarts, AnyModel, ComplexMultisetModel,
    DeepSetsBaseline, EvalMode, Head, LogPolarComplex, Model, Splits, Task, TrainConfig,
    DIGIT_VOCAB,
};
use msa_core::linalg;
use msa_core::posenc;
use num_complex::Complex64;
use rand::Rng;

const DIGIT_TRAIN_SIZE: usize = 20_000;
const DIGIT_SEED: u64 = 1;
const COMPLEX_WIDTH: usize = 50;

const TASK1_MIN_ACCURACY: f64 = 0.99;
const TASK1_BUDGET: Duration = Duration::from_secs(10 * 60);
const TASK2_MIN_ACCURACY: f64 = 0.95;
const TASK2_BASELINE_MAX_ACCURACY: f64 = 0.25;
const TASK2_BASELINE_FROM_LENGTH: usize = 55;
const TASK2_BUDGET: Duration = Duration::from_secs(15 * 60);
const TASK2_RESTARTS: usize = 5;
/// A restart with dev MSE this low rounds essentially every dev example correctly.
const TASK2_SOLVED_DEV_MSE: f64 = 0.01;
const TASK0_RATIO: f64 = 0.1;
const TASK0_AUTOMATA: u64 = 10;
const TASK0_MODELS: u64 = 10;
const TASK0_BUDGET: Duration = Duration::from_secs(20 * 60);
const ENCODING_TOL: f64 = 1e-9;
const ENCODING_POSITIONS: usize = 200;
const ASD_TOL: f64 = 1e-6;
const ASD_MAX_SIZE: usize = 4;
const EXAMPLE_TOL: f64 = 1e-12;
const ALGEBRA_INSTANCES: u64 = 50;
const ALGEBRA_TOL: f64 = 1e-9;
const GRAD_TOL: f64 = 1e-4;
const GRAD_STEP: f64 = 1e-4;
const DRIFT_TOL: f64 = 1e-9;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn min_accuracy(rows: &[msa_core::learn::LengthMetric], from_length: usize) -> (f64, usize) {
    rows.iter()
        .filter(|r| r.length >= from_length)
        .map(|r| (r.value, r.length))
        .fold(
            (f64::INFINITY, 0),
            |acc, x| if x.0 < acc.0 { x } else { acc },
        )
}

fn max_accuracy(rows: &[msa_core::learn::LengthMetric], from_length: usize) -> (f64, usize) {
    rows.iter()
        .filter(|r| r.length >= from_length)
        .map(|r| (r.value, r.length))
        .fold(
            (f64::NEG_INFINITY, 0),
            |acc, x| if x.0 > acc.0 { x } else { acc },
        )
}

fn complex_digit_model(seed: u64) -> AnyModel {
    let mut r = rng(seed);
    AnyModel::Complex(
        ComplexMultisetModel::new(DIGIT_VOCAB, COMPLEX_WIDTH, Head::Dense, false, &mut r).unwrap(),
    )
}

fn deepsets_digit_model(seed: u64) -> AnyModel {
    let mut r = rng(seed);
    AnyModel::DeepSets(DeepSetsBaseline::standard(DIGIT_VOCAB, &mut r).unwrap())
}

fn digit_sum() -> Verdict {
    let splits = gen_digitsum(DIGIT_TRAIN_SIZE, DIGIT_SEED, false).unwrap();
    let cfg = TrainConfig::digits(Task::DigitSum, DIGIT_SEED);
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, model) in [
        ("complex", complex_digit_model(DIGIT_SEED)),
        ("deepsets", deepsets_digit_model(DIGIT_SEED)),
    ] {
        let start = Instant::now();
        let out = train(model, &splits, &cfg).unwrap();
        let elapsed = start.elapsed();
        let rows = evaluate(&out.model, &splits.test, EvalMode::Rounded).unwrap();
        let (worst, at) = min_accuracy(&rows, 0);
        pass &= worst >= TASK1_MIN_ACCURACY && elapsed <= TASK1_BUDGET;
        parts.push(format!(
            "{name} min accuracy {worst:.4} (length {at}), {} epochs, {:.0}s",
            out.metrics.len(),
            elapsed.as_secs_f64()
        ));
    }
    verdict(
        pass,
        format!(
            "{}; need >= {TASK1_MIN_ACCURACY} at every length",
            parts.join("; ")
        ),
    )
}

fn units_digit() -> Verdict {
    let start = Instant::now();
    let splits = gen_digitsum(DIGIT_TRAIN_SIZE, DIGIT_SEED, true).unwrap();
    let cfg = TrainConfig::digits(Task::UnitsDigit, DIGIT_SEED);
    let mut parts = Vec::new();
    let mut accuracies = Vec::new();
    let models: [(&str, fn(u64) -> AnyModel); 2] = [
        ("complex", complex_digit_model),
        ("deepsets", deepsets_digit_model),
    ];
    for (name, make) in models {
        let out = train_restarts(
            |i| Ok(make(DIGIT_SEED + i as u64)),
            TASK2_RESTARTS,
            &splits,
            &cfg,
            Some(TASK2_SOLVED_DEV_MSE),
        )
        .unwrap();
        let rows = evaluate(&out.best.model, &splits.test, EvalMode::Units).unwrap();
        parts.push(format!(
            "{name}: best of {} runs is run {}",
            out.runs, out.best_run
        ));
        accuracies.push(rows);
    }
    let (worst, worst_at) = min_accuracy(&accuracies[0], 0);
    let (best_long, best_at) = max_accuracy(&accuracies[1], TASK2_BASELINE_FROM_LENGTH);
    let elapsed = start.elapsed();
    let pass = worst >= TASK2_MIN_ACCURACY
        && best_long <= TASK2_BASELINE_MAX_ACCURACY
        && elapsed <= TASK2_BUDGET;
    verdict(
        pass,
        format!(
            "complex min accuracy {worst:.4} (length {worst_at}), need >= {TASK2_MIN_ACCURACY}; deepsets max accuracy at lengths >= {TASK2_BASELINE_FROM_LENGTH} {best_long:.4} (length {best_at}), need <= {TASK2_BASELINE_MAX_ACCURACY}; {}; {:.0}s",
            parts.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn best_recovery(
    splits: &Splits,
    vocab: usize,
    d: usize,
    head: Head,
    task: Task,
    automaton: u64,
) -> f64 {
    (0..TASK0_MODELS)
        .map(|s| {
            let mut r = rng(1000 * automaton + s);
            let model = ComplexMultisetModel::new(vocab, d, head, true, &mut r).unwrap();
            let out = train(model, splits, &TrainConfig::recovery(task, s)).unwrap();
            mean_squared_error(&out.model, &splits.train).unwrap()
        })
        .fold(f64::INFINITY, f64::min)
}

fn automaton_recovery() -> Verdict {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    let configs = [
        ("unary", 2),
        ("unary", 3),
        ("unary", 4),
        ("diagonal", 2),
        ("diagonal", 4),
    ];
    for (kind, d) in configs {
        let mut worst: f64 = 0.0;
        let mut failures = 0;
        for a in 0..TASK0_AUTOMATA {
            let (splits, vocab, head, task) = match kind {
                "unary" => (
                    gen_task0_unary(d, a).unwrap().1,
                    1,
                    Head::SumReal,
                    Task::Task0Unary,
                ),
                _ => (
                    gen_task0_diag(d, 5, a).unwrap().1,
                    5,
                    Head::SumComplex,
                    Task::Task0Diag,
                ),
            };
            let baseline = mean_baseline(&splits.train).unwrap().mse;
            let ratio = best_recovery(&splits, vocab, d, head, task, a) / baseline;
            worst = worst.max(ratio);
            if !(ratio <= TASK0_RATIO) {
                failures += 1;
                parts.push(format!(
                    "{kind} d={d} automaton {a}: ratio {ratio:.3e} (baseline MSE {baseline:.3e})"
                ));
            }
        }
        pass &= failures == 0;
        parts.push(format!(
            "{kind} d={d}: worst best-of-{TASK0_MODELS} ratio {worst:.3e}"
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed <= TASK0_BUDGET;
    verdict(
        pass,
        format!(
            "{}; need <= {TASK0_RATIO} for each of {TASK0_AUTOMATA} automata; {:.0}s",
            parts.join("; "),
            elapsed.as_secs_f64()
        ),
    )
}

fn position_encoding() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for d in [4, 64, 512] {
        let cmp = posenc::compare_with_sinusoidal(d, ENCODING_POSITIONS).unwrap();
        worst = worst.max(cmp.max_deviation);
        parts.push(format!("d={d}: {:.2e}", cmp.max_deviation));
    }
    verdict(
        worst <= ENCODING_TOL,
        format!(
            "max deviation {} over positions 1..={ENCODING_POSITIONS}, need <= {ENCODING_TOL:e}",
            parts.join(", ")
        ),
    )
}

fn jordan_bounds() -> Verdict {
    let mut instances = 0;
    let mut violations = 0;
    let mut r = rng(5);
    for seed in 0..60u64 {
        let k = 1 + (seed % 5) as usize;
        let modulus = r.random_range(0.5..=2.0);
        let lambda = Complex64::from_polar(modulus, r.random_range(0.0..std::f64::consts::TAU));
        let eps = 10f64.powf(r.random_range(-4.0..-1.0));
        let block = JordanBlock::new(lambda, k);
        let e = perturb_jordan_nonzero(&block, eps, seed).unwrap();
        let sweep = power_error_sweep(&block.matrix(), &e, 50, 0.0, eps).unwrap();
        violations += sweep.iter().filter(|row| row.violated).count();
        instances += 1;
    }
    for seed in 0..60u64 {
        let d = 1 + (seed % 5) as usize;
        let radius = if seed % 2 == 0 { 0.5 } else { 0.9 };
        let eps = 10f64.powf(r.random_range(-4.0..0.0));
        let e = perturb_jordan_zero(d, eps, radius, seed).unwrap();
        let sweep =
            power_error_sweep(&JordanBlock::nilpotent(d).matrix(), &e, 60, radius, eps).unwrap();
        violations += sweep.iter().filter(|row| row.violated).count();
        instances += 1;
    }
    verdict(
        violations == 0 && instances >= 100,
        format!("{violations} violations across {instances} instances"),
    )
}

fn asd_construction() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for d in 1..=3 {
        for m in 1..=2 {
            for seed in 0..3u64 {
                let a = commuting_triangular(
                    &mut rng(100 * d as u64 + 10 * m as u64 + seed),
                    d,
                    &symbols(m),
                );
                let b = make_asd(&a, 1e-10).unwrap();
                let expected = asd_state_count(m, d).unwrap();
                if b.dim() as u128 != expected {
                    pass = false;
                    parts.push(format!(
                        "d={d} m={m}: {} states, expected {expected}",
                        b.dim()
                    ));
                }
                let report = algebra::equivalent(&a, &b, ASD_MAX_SIZE, ASD_TOL).unwrap();
                pass &= report.equivalent;
                worst = worst.max(report.max_deviation);
                cases += 1;
            }
        }
    }
    let shuffled = algebra::shuffle(&m2(), &m1(), AlphabetPolicy::PadWithZeros).unwrap();
    let target = m3();
    let mut gap: f64 = (shuffled.lambda() - target.lambda())
        .norm()
        .max((shuffled.rho() - target.rho()).norm());
    let same_alphabet = shuffled.alphabet() == target.alphabet();
    if same_alphabet {
        for s in target.alphabet() {
            gap = gap.max(linalg::frobenius(
                &(shuffled.mu(s).unwrap() - target.mu(s).unwrap()),
            ));
        }
    }
    pass &= same_alphabet && gap <= EXAMPLE_TOL;
    parts.push(format!(
        "{cases} constructions, worst relative weight gap {worst:.2e} (need <= {ASD_TOL:e}); shuffle(M2, M1) vs M3 entry gap {gap:.1e}"
    ));
    verdict(pass, parts.join("; "))
}

fn algebra_invariants() -> Verdict {
    let mut worst = [0.0f64; 5];
    let names = [
        "direct sum",
        "shuffle",
        "change of basis",
        "kronecker conjugation",
        "norm bound",
    ];
    for seed in 0..ALGEBRA_INSTANCES {
        let mut r = rng(7000 + seed);
        let (da, db) = (1 + (seed % 3) as usize, 1 + (seed / 3 % 3) as usize);
        let shared = symbols(2);
        let a = commuting(&mut r, da, &shared);
        let b = commuting(&mut r, db, &shared);
        let sum = algebra::direct_sum(&a, &b, AlphabetPolicy::Strict).unwrap();
        for w in algebra::multisets_up_to(&["a", "b"], 4) {
            let expected = a.weight(&w).unwrap() + b.weight(&w).unwrap();
            worst[0] = worst[0].max(relative_gap(expected, sum.weight(&w).unwrap()));
        }

        let left = commuting(&mut r, da, &["a".to_string()]);
        let right = commuting(&mut r, db, &["b".to_string(), "c".to_string()]);
        let prod = algebra::shuffle(&left, &right, AlphabetPolicy::PadWithZeros).unwrap();
        for w in algebra::multisets_up_to(&["a", "b", "c"], 4) {
            let wl = left.weight(&w.restricted(|s| s == "a")).unwrap();
            let wr = right.weight(&w.restricted(|s| s != "a")).unwrap();
            worst[1] = worst[1].max(relative_gap(wl * wr, prod.weight(&w).unwrap()));
        }

        let p = well_conditioned(&mut r, da);
        let moved = algebra::change_of_basis(&a, &p).unwrap();
        worst[2] = worst[2].max(
            algebra::equivalent(&a, &moved, 4, ALGEBRA_TOL)
                .unwrap()
                .max_deviation,
        );

        let (x, y) = (matrix(&mut r, da), matrix(&mut r, db));
        let (p1, p2) = (well_conditioned(&mut r, da), well_conditioned(&mut r, db));
        let (i1, _) = linalg::invert(&p1, linalg::MAX_CONDITION).unwrap();
        let (i2, _) = linalg::invert(&p2, linalg::MAX_CONDITION).unwrap();
        let (pi, _) = linalg::invert(&linalg::kron(&p1, &p2), linalg::MAX_CONDITION).unwrap();
        let lhs = linalg::kron(&p1, &p2) * linalg::kron_sum(&x, &y) * pi;
        let rhs = linalg::kron_sum(&(&p1 * &x * i1), &(&p2 * &y * i2));
        worst[3] =
            worst[3].max(linalg::frobenius(&(&lhs - &rhs)) / linalg::frobenius(&rhs).max(1.0));

        let norm = linalg::frobenius(&linalg::kron_sum(&x, &y));
        let bound = linalg::frobenius(&x) * db as f64 + da as f64 * linalg::frobenius(&y);
        worst[4] = worst[4].max(norm / bound);
    }
    let pass = worst[..4].iter().all(|&w| w <= ALGEBRA_TOL) && worst[4] <= 1.0 + 1e-12;
    let detail: Vec<String> = names
        .iter()
        .zip(&worst)
        .map(|(n, w)| format!("{n} {w:.1e}"))
        .collect();
    verdict(
        pass,
        format!("{ALGEBRA_INSTANCES} instances each; worst {} (norm bound as ratio, need <= 1; others need <= {ALGEBRA_TOL:e})", detail.join(", ")),
    )
}

fn gradients_and_representation() -> Verdict {
    let splits = gen_digitsum(100, 3, false).unwrap();
    let sample = &splits.train.examples[..4];
    let mut r = rng(11);
    let complex =
        ComplexMultisetModel::new(DIGIT_VOCAB, COMPLEX_WIDTH, Head::Dense, false, &mut r).unwrap();
    let deepsets = DeepSetsBaseline::standard(DIGIT_VOCAB, &mut r).unwrap();
    let gc = grad_check(&complex, sample, GRAD_STEP).unwrap();
    let gd = grad_check(&deepsets, sample, GRAD_STEP).unwrap();

    let mut acc = LogPolarComplex::ONE;
    let mut drift: f64 = 0.0;
    for _ in 0..1000 {
        let z = LogPolarComplex::normalized(
            r.random_range(-0.1..0.1),
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
        );
        acc = logpolar_mul(acc, z);
        drift = drift.max(acc.unit_drift());
    }

    let (nc, nd) = (complex.num_params(), deepsets.num_params());
    let pass = gc <= GRAD_TOL && gd <= GRAD_TOL && drift <= DRIFT_TOL && nc == 1801 && nd == 4161;
    verdict(
        pass,
        format!(
            "grad check complex {gc:.1e}, deepsets {gd:.1e} (need <= {GRAD_TOL:e}); 1000-factor drift {drift:.1e} (need <= {DRIFT_TOL:e}); parameters {nc} and {nd} (need 1801 and 4161)"
        ),
    )
}

fn selected() -> Option<Vec<usize>> {
    let list = std::env::var("ACCEPTANCE_ONLY").ok()?;
    Some(
        list.split(',')
            .filter_map(|s| s.trim().parse().ok())
            .collect(),
    )
}

fn main() {
    // Let `cargo test -- --list` and filters work without running the suite.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(usize, &str, fn() -> Verdict); 8] = [
        (1, "digit sum", digit_sum),
        (2, "units digit", units_digit),
        (3, "automaton recovery", automaton_recovery),
        (4, "position encoding", position_encoding),
        (5, "jordan perturbation bounds", jordan_bounds),
        (6, "asd construction", asd_construction),
        (7, "algebra invariants", algebra_invariants),
        (
            8,
            "gradients and representation",
            gradients_and_representation,
        ),
    ];
    let only = selected();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let v = run();
        println!(
            "{} [{id}] {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        failed += usize::from(!v.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
