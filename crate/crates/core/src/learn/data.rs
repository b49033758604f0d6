use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Value;
use crate::algebra;
use crate::automaton::{DiagonalAutomaton, Kind, Multiset, WeightedAutomaton};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CRowVector, CVector};
use crate::seeds::SeedStreams;

/// Embedding table size for digit tasks: indices 0..=10, of which the
/// digits 1..=9 occur in data.
pub const DIGIT_VOCAB: usize = 11;

/// Test sequence lengths for the digit tasks: 5, 10, …, 95.
pub const TEST_LENGTHS: [usize; 19] = [
    5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60, 65, 70, 75, 80, 85, 90, 95,
];

pub const DEFAULT_TEST_PER_LENGTH: usize = 1000;

/// Longest training sequence for the digit tasks.
pub const MAX_TRAIN_LENGTH: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example {
    pub seq: Vec<usize>,
    pub target: Value,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub examples: Vec<Example>,
}

impl Dataset {
    pub fn new(examples: Vec<Example>) -> Self {
        Self { examples }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

/// Where a dataset came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
    pub params: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Splits {
    pub train: Dataset,
    pub dev: Dataset,
    pub test: Dataset,
    pub provenance: Provenance,
}

impl Splits {
    fn train_only(train: Vec<Example>, provenance: Provenance) -> Self {
        Self {
            train: Dataset::new(train),
            dev: Dataset::default(),
            test: Dataset::default(),
            provenance,
        }
    }
}

/// A Haar-distributed random orthogonal matrix: QR of a standard Gaussian
/// matrix with the columns of Q sign-corrected by the diagonal of R.
pub fn haar_orthogonal(d: usize, seed: u64) -> Result<DMatrix<f64>> {
    haar_orthogonal_with(d, &mut SeedStreams::new(seed).rng("haar"))
}

pub fn haar_orthogonal_with(d: usize, rng: &mut impl Rng) -> Result<DMatrix<f64>> {
    if d == 0 {
        return Err(Error::InvalidArgument(
            "dimension must be at least 1".into(),
        ));
    }
    let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(q)
}

fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// A unary automaton with Haar-orthogonal transitions and Gaussian initial
/// and final weights, with its weights on `aⁿ` for `n = 0..=20`.
pub fn gen_task0_unary(d: usize, seed: u64) -> Result<(WeightedAutomaton, Splits)> {
    let streams = SeedStreams::new(seed);
    let mut rng = streams.rng("automaton");
    let mu = haar_orthogonal_with(d, &mut rng)?;
    let lambda = CRowVector::from_fn(d, |_, _| linalg::c(rng.sample(StandardNormal), 0.0));
    let rho = CVector::from_fn(d, |_, _| linalg::c(rng.sample(StandardNormal), 0.0));
    let mu = BTreeMap::from([("a".to_string(), mu.map(|x| linalg::c(x, 0.0)) as CMatrix)]);
    let m = WeightedAutomaton::new(lambda, mu, rho, Kind::Multiset)?;
    let mut examples = Vec::with_capacity(21);
    for n in 0..=20 {
        let w = m.weight(&Multiset::from_counts([("a", n)]))?;
        examples.push(Example {
            seq: vec![0; n],
            target: Value::Real(w.re),
        });
    }
    let provenance = Provenance {
        generator: "task0_unary".into(),
        seed,
        params: BTreeMap::from([("d".into(), d.into())]),
    };
    Ok((m, Splits::train_only(examples, provenance)))
}

/// Symbol name used for index `i` in the diagonal task's automaton.
pub fn symbol_name(i: usize) -> String {
    format!("s{i:03}")
}

/// A diagonal automaton over `m` symbols whose entries have real and
/// imaginary parts uniform in `[0, 1]`, each diagonal divided by its largest
/// modulus; initial and final weights are complex Gaussian. The dataset is
/// every multiset of size 5 with its complex weight.
pub fn gen_task0_diag(d: usize, m: usize, seed: u64) -> Result<(DiagonalAutomaton, Splits)> {
    if d == 0 || m == 0 {
        return Err(Error::InvalidArgument(
            "states and symbols must be at least 1".into(),
        ));
    }
    let mut rng = SeedStreams::new(seed).rng("automaton");
    let mut diag = BTreeMap::new();
    for i in 0..m {
        let mut entries: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
            .collect();
        let max = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        entries.iter_mut().for_each(|z| *z /= max);
        diag.insert(symbol_name(i), entries);
    }
    let lambda = (0..d).map(|_| gaussian_complex(&mut rng)).collect();
    let rho = (0..d).map(|_| gaussian_complex(&mut rng)).collect();
    let automaton = DiagonalAutomaton::new(lambda, diag, rho)?;

    let names: Vec<String> = (0..m).map(symbol_name).collect();
    let alphabet: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut examples = Vec::new();
    for w in algebra::multisets_of_size(&alphabet, 5) {
        let seq = (0..m)
            .flat_map(|i| std::iter::repeat_n(i, w.count(&names[i])))
            .collect();
        let z = automaton.weight(&w)?;
        examples.push(Example {
            seq,
            target: Value::Complex([z.re, z.im]),
        });
    }
    let provenance = Provenance {
        generator: "task0_diag".into(),
        seed,
        params: BTreeMap::from([
            ("d".into(), d.into()),
            ("m".into(), m.into()),
            ("length".into(), 5.into()),
        ]),
    };
    Ok((automaton, Splits::train_only(examples, provenance)))
}

fn digit_example(rng: &mut impl Rng, len: usize, units_only: bool) -> Example {
    let seq: Vec<usize> = (0..len).map(|_| rng.random_range(1..=9)).collect();
    let sum: usize = seq.iter().sum();
    let target = if units_only { sum % 10 } else { sum };
    Example {
        seq,
        target: Value::Real(target as f64),
    }
}

/// Digit sequences with their sum (or the sum's units digit), using
/// [`DEFAULT_TEST_PER_LENGTH`] test sequences per test length.
pub fn gen_digitsum(n_train: usize, seed: u64, units_only: bool) -> Result<Splits> {
    gen_digitsum_with(n_train, DEFAULT_TEST_PER_LENGTH, seed, units_only)
}

/// `n_train` sequences of digits 1–9 with lengths 1–50, split 99/1 into
/// train and dev, plus `test_per_length` sequences at each of
/// [`TEST_LENGTHS`]. The sequences depend only on the seed, so the sum and
/// units-digit variants share inputs.
pub fn gen_digitsum_with(
    n_train: usize,
    test_per_length: usize,
    seed: u64,
    units_only: bool,
) -> Result<Splits> {
    if n_train < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 training sequences, got {n_train}"
        )));
    }
    let streams = SeedStreams::new(seed);
    let mut rng = streams.rng("data");
    let mut all: Vec<Example> = (0..n_train)
        .map(|_| {
            let len = rng.random_range(1..=MAX_TRAIN_LENGTH);
            digit_example(&mut rng, len, units_only)
        })
        .collect();
    let dev = all.split_off(n_train - n_train.div_ceil(100));
    let mut rng = streams.rng("test");
    let test = TEST_LENGTHS
        .iter()
        .flat_map(|&len| (0..test_per_length).map(move |_| len))
        .map(|len| digit_example(&mut rng, len, units_only))
        .collect();
    let provenance = Provenance {
        generator: if units_only {
            "units_digit"
        } else {
            "digit_sum"
        }
        .into(),
        seed,
        params: BTreeMap::from([
            ("n_train".into(), n_train.into()),
            ("test_per_length".into(), test_per_length.into()),
            ("units_only".into(), units_only.into()),
        ]),
    };
    Ok(Splits {
        train: Dataset::new(all),
        dev: Dataset::new(dev),
        test: Dataset::new(test),
        provenance,
    })
}

/// One JSON object per line: `{"seq":[…],"target":x}` or `"target":[re,im]`.
pub fn write_jsonl(data: &Dataset, mut out: impl Write) -> Result<()> {
    for ex in &data.examples {
        serde_json::to_writer(&mut out, ex)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl(input: impl BufRead) -> Result<Dataset> {
    let mut examples = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ex: Example = serde_json::from_str(&line)?;
        if !ex.target.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "line {}: target is not finite",
                i + 1
            )));
        }
        examples.push(ex);
    }
    Ok(Dataset::new(examples))
}
