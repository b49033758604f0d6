//! Weighted automata in matrix form `(λ, μ, ρ)` and their weights on multisets.
//!
//! Every automaton stores complex scalars; real automata simply carry zero
//! imaginary parts. The alphabet is kept sorted, and that sorted order is the
//! canonical evaluation order when the transition matrices do not commute.

use std::collections::{BTreeMap, HashSet};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CRowVector, CVector};

pub type ComplexScalar = Complex64;

/// Default Frobenius tolerance on `μ(a)μ(b) − μ(b)μ(a)` for multiset automata.
pub const DEFAULT_COMMUTE_TOL: f64 = 1e-10;

/// A finite multiset of symbols, stored as counts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multiset {
    counts: BTreeMap<String, usize>,
    size: usize,
}

impl Multiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts<S: Into<String>>(counts: impl IntoIterator<Item = (S, usize)>) -> Self {
        let mut m = Self::new();
        for (s, n) in counts {
            m.add(s, n);
        }
        m
    }

    pub fn add(&mut self, symbol: impl Into<String>, n: usize) {
        if n == 0 {
            return;
        }
        *self.counts.entry(symbol.into()).or_insert(0) += n;
        self.size += n;
    }

    pub fn with(&self, symbol: &str) -> Self {
        let mut m = self.clone();
        m.add(symbol, 1);
        m
    }

    pub fn count(&self, symbol: &str) -> usize {
        self.counts.get(symbol).copied().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// `(symbol, count)` pairs in sorted symbol order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.counts.iter().map(|(s, &n)| (s.as_str(), n))
    }

    /// The symbols spelled out in sorted order, with repetition.
    pub fn to_sorted_symbols(&self) -> Vec<&str> {
        let mut out = Vec::with_capacity(self.size);
        for (s, n) in self.iter() {
            out.extend(std::iter::repeat_n(s, n));
        }
        out
    }

    /// The sub-multiset of symbols accepted by `keep`.
    pub fn restricted(&self, mut keep: impl FnMut(&str) -> bool) -> Self {
        Self::from_counts(
            self.iter()
                .filter(|(s, _)| keep(s))
                .map(|(s, n)| (s.to_string(), n)),
        )
    }
}

impl<'a> FromIterator<&'a str> for Multiset {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        let mut m = Multiset::new();
        for s in iter {
            m.add(s, 1);
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// Transition matrices commute pairwise.
    Multiset,
    /// No commutation requirement; weights use the canonical symbol order.
    String,
}

/// A weighted finite automaton `(λ, μ, ρ)` over complex scalars.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AutomatonJson", into = "AutomatonJson")]
pub struct WeightedAutomaton {
    lambda: CRowVector,
    mu: BTreeMap<String, CMatrix>,
    rho: CVector,
    kind: Kind,
}

impl WeightedAutomaton {
    /// Builds an automaton, checking shapes, finiteness and (for
    /// [`Kind::Multiset`]) commutation within [`DEFAULT_COMMUTE_TOL`].
    pub fn new(
        lambda: CRowVector,
        mu: BTreeMap<String, CMatrix>,
        rho: CVector,
        kind: Kind,
    ) -> Result<Self> {
        Self::with_tolerance(lambda, mu, rho, kind, DEFAULT_COMMUTE_TOL)
    }

    pub fn with_tolerance(
        lambda: CRowVector,
        mu: BTreeMap<String, CMatrix>,
        rho: CVector,
        kind: Kind,
        tol: f64,
    ) -> Result<Self> {
        let d = lambda.len();
        if rho.len() != d {
            return Err(Error::Dimension(format!(
                "λ has length {d} but ρ has length {}",
                rho.len()
            )));
        }
        for (s, m) in &mu {
            if m.shape() != (d, d) {
                return Err(Error::Dimension(format!(
                    "μ({s}) is {}x{}, expected {d}x{d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if !linalg::is_finite(m) {
                return Err(Error::NonFinite("transition matrix"));
            }
        }
        if !lambda
            .iter()
            .chain(rho.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return Err(Error::NonFinite("initial or final weights"));
        }
        let m = Self {
            lambda,
            mu,
            rho,
            kind,
        };
        if kind == Kind::Multiset {
            let defect = m.commutation_defect();
            if defect > tol {
                return Err(Error::NotCommuting { defect, tol });
            }
        }
        Ok(m)
    }

    /// Convenience constructor from real data given row-major.
    pub fn from_real(
        lambda: &[f64],
        mu: &[(&str, &[f64])],
        rho: &[f64],
        kind: Kind,
    ) -> Result<Self> {
        let d = lambda.len();
        let mut map = BTreeMap::new();
        for (s, data) in mu {
            if data.len() != d * d {
                return Err(Error::Dimension(format!("μ({s}) needs {} entries", d * d)));
            }
            map.insert(s.to_string(), linalg::from_real(d, d, data));
        }
        Self::new(
            CRowVector::from_iterator(d, lambda.iter().map(|&x| linalg::c(x, 0.0))),
            map,
            CVector::from_iterator(rho.len(), rho.iter().map(|&x| linalg::c(x, 0.0))),
            kind,
        )
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn alphabet(&self) -> Vec<&str> {
        self.mu.keys().map(String::as_str).collect()
    }

    pub fn lambda(&self) -> &CRowVector {
        &self.lambda
    }

    pub fn rho(&self) -> &CVector {
        &self.rho
    }

    pub fn mu(&self, symbol: &str) -> Option<&CMatrix> {
        self.mu.get(symbol)
    }

    pub fn transitions(&self) -> &BTreeMap<String, CMatrix> {
        &self.mu
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    /// True when every stored entry has a zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.lambda
            .iter()
            .chain(self.rho.iter())
            .all(|z| z.im == 0.0)
            && self.mu.values().all(|m| m.iter().all(|z| z.im == 0.0))
    }

    fn transition(&self, symbol: &str) -> Result<&CMatrix> {
        self.mu
            .get(symbol)
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))
    }

    /// Forward weights `λ μ(w)`, multiplying symbol powers in sorted order.
    pub fn forward_weights(&self, w: &Multiset) -> Result<CRowVector> {
        let mut v = self.lambda.clone();
        for (s, n) in w.iter() {
            let m = self.transition(s)?;
            v = apply_power(v, m, n as u64);
        }
        Ok(v)
    }

    /// The weight `λ μ(w) ρ`.
    pub fn weight(&self, w: &Multiset) -> Result<ComplexScalar> {
        Ok((self.forward_weights(w)? * &self.rho)[(0, 0)])
    }

    /// String weight `λ μ(w₁)⋯μ(wₙ) ρ` in the given order.
    pub fn string_weight(&self, word: &[&str]) -> Result<ComplexScalar> {
        let mut v = self.lambda.clone();
        for s in word {
            v = &v * self.transition(s)?;
        }
        Ok((v * &self.rho)[(0, 0)])
    }

    /// Largest Frobenius norm of `μ(a)μ(b) − μ(b)μ(a)` over symbol pairs.
    pub fn commutation_defect(&self) -> f64 {
        let mats: Vec<&CMatrix> = self.mu.values().collect();
        let mut worst: f64 = 0.0;
        for i in 0..mats.len() {
            for j in (i + 1)..mats.len() {
                let comm = mats[i] * mats[j] - mats[j] * mats[i];
                worst = worst.max(linalg::frobenius(&comm));
            }
        }
        worst
    }

    /// Evaluates the string weight over up to `n_orders` distinct random
    /// orderings of `w`. Used as an oracle for order independence.
    pub fn weight_by_permutation_oracle(
        &self,
        w: &Multiset,
        n_orders: usize,
        seed: u64,
    ) -> Result<Vec<ComplexScalar>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base: Vec<&str> = w.to_sorted_symbols();
        let mut seen: HashSet<Vec<&str>> = HashSet::new();
        let mut out = Vec::with_capacity(n_orders);
        let mut attempts = 0;
        while out.len() < n_orders && attempts < 64 * n_orders.max(1) {
            attempts += 1;
            let mut order = base.clone();
            order.shuffle(&mut rng);
            if seen.insert(order.clone()) {
                out.push(self.string_weight(&order)?);
            }
        }
        Ok(out)
    }

    /// Same automaton with different weight vectors; shapes are checked.
    pub fn with_weights(&self, lambda: CRowVector, rho: CVector) -> Result<Self> {
        let d = self.dim();
        if lambda.len() != d || rho.len() != d {
            return Err(Error::Dimension(format!(
                "weight vectors must have length {d}"
            )));
        }
        if !lambda
            .iter()
            .chain(rho.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return Err(Error::NonFinite("initial or final weights"));
        }
        Ok(Self {
            lambda,
            mu: self.mu.clone(),
            rho,
            kind: self.kind,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub(crate) fn from_parts_unchecked(
        lambda: CRowVector,
        mu: BTreeMap<String, CMatrix>,
        rho: CVector,
        kind: Kind,
    ) -> Self {
        Self {
            lambda,
            mu,
            rho,
            kind,
        }
    }
}

/// `v · mᵏ`, by repeated squaring of `m` unless `k` vector-matrix products
/// are cheaper than the `O(log k)` matrix products.
fn apply_power(v: CRowVector, m: &CMatrix, k: u64) -> CRowVector {
    let d = m.nrows() as u64;
    let squarings = 64 - u64::from(k.leading_zeros());
    if k <= squarings * d {
        (0..k).fold(v, |acc, _| acc * m)
    } else {
        v * linalg::mat_pow(m, k)
    }
}

/// An automaton whose transition matrices are diagonal, stored as vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalAutomaton {
    lambda: Vec<Complex64>,
    diag: BTreeMap<String, Vec<Complex64>>,
    rho: Vec<Complex64>,
}

impl DiagonalAutomaton {
    pub fn new(
        lambda: Vec<Complex64>,
        diag: BTreeMap<String, Vec<Complex64>>,
        rho: Vec<Complex64>,
    ) -> Result<Self> {
        let d = lambda.len();
        if rho.len() != d || diag.values().any(|v| v.len() != d) {
            return Err(Error::Dimension(format!(
                "diagonal automaton with {d} states has inconsistent vectors"
            )));
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !lambda
            .iter()
            .chain(&rho)
            .chain(diag.values().flatten())
            .all(finite)
        {
            return Err(Error::NonFinite("diagonal automaton"));
        }
        Ok(Self { lambda, diag, rho })
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn alphabet(&self) -> Vec<&str> {
        self.diag.keys().map(String::as_str).collect()
    }

    pub fn lambda(&self) -> &[Complex64] {
        &self.lambda
    }

    pub fn rho(&self) -> &[Complex64] {
        &self.rho
    }

    pub fn diagonal(&self, symbol: &str) -> Option<&[Complex64]> {
        self.diag.get(symbol).map(Vec::as_slice)
    }

    pub fn forward_weights(&self, w: &Multiset) -> Result<Vec<Complex64>> {
        let mut v = self.lambda.clone();
        for (s, n) in w.iter() {
            let entries = self
                .diag
                .get(s)
                .ok_or_else(|| Error::UnknownSymbol(s.to_string()))?;
            for (x, z) in v.iter_mut().zip(entries) {
                *x *= z.powu(n as u32);
            }
        }
        Ok(v)
    }

    pub fn weight(&self, w: &Multiset) -> Result<ComplexScalar> {
        Ok(self
            .forward_weights(w)?
            .iter()
            .zip(&self.rho)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn to_weighted(&self) -> WeightedAutomaton {
        let d = self.dim();
        let mu = self
            .diag
            .iter()
            .map(|(s, v)| (s.clone(), linalg::diag(v)))
            .collect();
        WeightedAutomaton::from_parts_unchecked(
            CRowVector::from_row_slice(&self.lambda),
            mu,
            CVector::from_column_slice(&self.rho[..d]),
            Kind::Multiset,
        )
    }
}

/// On-disk schema: complex numbers are `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AutomatonJson {
    d: usize,
    alphabet: Vec<String>,
    lambda: Vec<[f64; 2]>,
    mu: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
    rho: Vec<[f64; 2]>,
    kind: Kind,
}

fn pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

impl From<WeightedAutomaton> for AutomatonJson {
    fn from(m: WeightedAutomaton) -> Self {
        let d = m.dim();
        Self {
            d,
            alphabet: m.mu.keys().cloned().collect(),
            lambda: m.lambda.iter().map(pair).collect(),
            mu: m
                .mu
                .iter()
                .map(|(s, a)| {
                    let rows = (0..d)
                        .map(|i| (0..d).map(|j| pair(&a[(i, j)])).collect())
                        .collect();
                    (s.clone(), rows)
                })
                .collect(),
            rho: m.rho.iter().map(pair).collect(),
            kind: m.kind,
        }
    }
}

impl TryFrom<AutomatonJson> for WeightedAutomaton {
    type Error = Error;

    fn try_from(j: AutomatonJson) -> Result<Self> {
        let d = j.d;
        let keys: Vec<&String> = j.mu.keys().collect();
        let mut alphabet: Vec<&String> = j.alphabet.iter().collect();
        alphabet.sort();
        if keys != alphabet {
            return Err(Error::InvalidArgument(format!(
                "alphabet {:?} does not match transition symbols {:?}",
                j.alphabet, keys
            )));
        }
        if j.lambda.len() != d || j.rho.len() != d {
            return Err(Error::Dimension(format!(
                "weight vectors must have length d = {d}"
            )));
        }
        let to_c = |p: &[f64; 2]| linalg::c(p[0], p[1]);
        let mut mu = BTreeMap::new();
        for (s, rows) in &j.mu {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(Error::Dimension(format!("μ({s}) must be {d}x{d}")));
            }
            mu.insert(s.clone(), CMatrix::from_fn(d, d, |r, c| to_c(&rows[r][c])));
        }
        WeightedAutomaton::new(
            CRowVector::from_iterator(d, j.lambda.iter().map(to_c)),
            mu,
            CVector::from_iterator(d, j.rho.iter().map(to_c)),
            j.kind,
        )
    }
}
