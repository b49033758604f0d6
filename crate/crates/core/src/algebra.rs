//! Direct sum, shuffle product, change of basis and scalar scaling of
//! automata, plus a brute-force equivalence check over small multisets.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::automaton::{Kind, Multiset, WeightedAutomaton};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CRowVector, CVector, MAX_CONDITION};

/// Default cap on the number of multisets [`equivalent`] will enumerate.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 2_000_000;

/// How to combine automata whose alphabets differ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphabetPolicy {
    /// Alphabets must be identical.
    Strict,
    /// Symbols missing on one side get a zero transition matrix.
    PadWithZeros,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Initial,
    Final,
}

type Aligned = BTreeMap<String, (CMatrix, CMatrix)>;

fn align(a: &WeightedAutomaton, b: &WeightedAutomaton, policy: AlphabetPolicy) -> Result<Aligned> {
    if policy == AlphabetPolicy::Strict && a.alphabet() != b.alphabet() {
        return Err(Error::AlphabetMismatch {
            left: a.alphabet().iter().map(|s| s.to_string()).collect(),
            right: b.alphabet().iter().map(|s| s.to_string()).collect(),
        });
    }
    let (da, db) = (a.dim(), b.dim());
    let mut out = Aligned::new();
    for s in a.alphabet().into_iter().chain(b.alphabet()) {
        if out.contains_key(s) {
            continue;
        }
        let ma = a.mu(s).cloned().unwrap_or_else(|| CMatrix::zeros(da, da));
        let mb = b.mu(s).cloned().unwrap_or_else(|| CMatrix::zeros(db, db));
        out.insert(s.to_string(), (ma, mb));
    }
    Ok(out)
}

fn combined_kind(a: &WeightedAutomaton, b: &WeightedAutomaton) -> Kind {
    if a.kind() == Kind::Multiset && b.kind() == Kind::Multiset {
        Kind::Multiset
    } else {
        Kind::String
    }
}

/// `a ⊕ b`: block-diagonal combination whose weight is the sum of weights.
pub fn direct_sum(
    a: &WeightedAutomaton,
    b: &WeightedAutomaton,
    policy: AlphabetPolicy,
) -> Result<WeightedAutomaton> {
    let mu = align(a, b, policy)?
        .into_iter()
        .map(|(s, (ma, mb))| (s, linalg::block_diag(&ma, &mb)))
        .collect();
    let lambda = CRowVector::from_iterator(
        a.dim() + b.dim(),
        a.lambda().iter().chain(b.lambda().iter()).copied(),
    );
    let rho = CVector::from_iterator(
        a.dim() + b.dim(),
        a.rho().iter().chain(b.rho().iter()).copied(),
    );
    Ok(WeightedAutomaton::from_parts_unchecked(
        lambda,
        mu,
        rho,
        combined_kind(a, b),
    ))
}

/// `a ⧢ b`: the Kronecker-sum automaton. On disjoint alphabets its weight is
/// the product of the weights of the two restrictions.
pub fn shuffle(
    a: &WeightedAutomaton,
    b: &WeightedAutomaton,
    policy: AlphabetPolicy,
) -> Result<WeightedAutomaton> {
    let mu = align(a, b, policy)?
        .into_iter()
        .map(|(s, (ma, mb))| (s, linalg::kron_sum(&ma, &mb)))
        .collect();
    let lambda = a.lambda().kronecker(b.lambda());
    let rho = a.rho().kronecker(b.rho());
    Ok(WeightedAutomaton::from_parts_unchecked(
        lambda,
        mu,
        rho,
        combined_kind(a, b),
    ))
}

/// `(λP⁻¹, Pμ(a)P⁻¹, Pρ)`, which has the same multiset weights as `m`.
///
/// Refuses `p` whose 1-norm condition number exceeds `1e12`.
pub fn change_of_basis(m: &WeightedAutomaton, p: &CMatrix) -> Result<WeightedAutomaton> {
    if p.shape() != (m.dim(), m.dim()) {
        return Err(Error::Dimension(format!(
            "basis is {}x{} but the automaton has {} states",
            p.nrows(),
            p.ncols(),
            m.dim()
        )));
    }
    let (p_inv, _) = linalg::invert(p, MAX_CONDITION)?;
    Ok(change_of_basis_with_inverse(m, p, &p_inv))
}

/// Change of basis when `p⁻¹` is already known (e.g. `p` unitary).
pub fn change_of_basis_with_inverse(
    m: &WeightedAutomaton,
    p: &CMatrix,
    p_inv: &CMatrix,
) -> WeightedAutomaton {
    let mu = m
        .transitions()
        .iter()
        .map(|(s, a)| (s.clone(), p * a * p_inv))
        .collect();
    WeightedAutomaton::from_parts_unchecked(m.lambda() * p_inv, mu, p * m.rho(), m.kind())
}

/// Multiplies the initial or final weight vector by `c`.
pub fn scale(m: &WeightedAutomaton, c: Complex64, side: Side) -> WeightedAutomaton {
    let (lambda, rho) = match side {
        Side::Initial => (m.lambda() * c, m.rho().clone()),
        Side::Final => (m.lambda().clone(), m.rho() * c),
    };
    WeightedAutomaton::from_parts_unchecked(lambda, m.transitions().clone(), rho, m.kind())
}

/// Number of multisets of total size at most `max_size` over `m` symbols,
/// `C(max_size + m, m)`.
pub fn multiset_count_up_to(m: usize, max_size: usize) -> u128 {
    binomial((max_size + m) as u128, m as u128)
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

fn enumerate_counts(m: usize, max_size: usize, exact: bool, mut emit: impl FnMut(&[usize])) {
    let mut counts = vec![0usize; m];
    let mut total = 0usize;
    loop {
        if !exact || total == max_size {
            emit(&counts);
        }
        let mut i = m;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            counts[i] += 1;
            total += 1;
            if total <= max_size {
                break;
            }
            total -= counts[i];
            counts[i] = 0;
        }
    }
}

fn to_multiset(alphabet: &[&str], counts: &[usize]) -> Multiset {
    Multiset::from_counts(
        alphabet
            .iter()
            .zip(counts)
            .map(|(s, &n)| (s.to_string(), n)),
    )
}

/// Every multiset over `alphabet` with total size at most `max_size`.
pub fn multisets_up_to(alphabet: &[&str], max_size: usize) -> Vec<Multiset> {
    let mut out = Vec::new();
    enumerate_counts(alphabet.len(), max_size, false, |c| {
        out.push(to_multiset(alphabet, c))
    });
    out
}

/// Every multiset over `alphabet` with total size exactly `size`.
pub fn multisets_of_size(alphabet: &[&str], size: usize) -> Vec<Multiset> {
    let mut out = Vec::new();
    enumerate_counts(alphabet.len(), size, true, |c| {
        out.push(to_multiset(alphabet, c))
    });
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    /// Largest `|w_a − w_b| / (1 + |w_a|)` seen.
    pub max_deviation: f64,
    pub worst: Option<Multiset>,
    pub checked: usize,
}

/// Brute-force equivalence on all multisets of size at most `max_size`.
///
/// Two weights agree when `|w_a − w_b| ≤ tol · (1 + |w_a|)`.
pub fn equivalent(
    a: &WeightedAutomaton,
    b: &WeightedAutomaton,
    max_size: usize,
    tol: f64,
) -> Result<EquivalenceReport> {
    equivalent_with_budget(a, b, max_size, tol, DEFAULT_ENUMERATION_BUDGET)
}

pub fn equivalent_with_budget(
    a: &WeightedAutomaton,
    b: &WeightedAutomaton,
    max_size: usize,
    tol: f64,
    budget: u128,
) -> Result<EquivalenceReport> {
    if a.alphabet() != b.alphabet() {
        return Err(Error::AlphabetMismatch {
            left: a.alphabet().iter().map(|s| s.to_string()).collect(),
            right: b.alphabet().iter().map(|s| s.to_string()).collect(),
        });
    }
    let alphabet = a.alphabet();
    let count = multiset_count_up_to(alphabet.len(), max_size);
    if count > budget {
        return Err(Error::EnumerationBudget { count, budget });
    }
    let mut report = EquivalenceReport {
        equivalent: true,
        max_deviation: 0.0,
        worst: None,
        checked: 0,
    };
    for w in multisets_up_to(&alphabet, max_size) {
        let wa = a.weight(&w)?;
        let wb = b.weight(&w)?;
        let dev = (wa - wb).norm() / (1.0 + wa.norm());
        let dev = if dev.is_nan() { f64::INFINITY } else { dev };
        report.checked += 1;
        if dev > tol {
            report.equivalent = false;
        }
        if report.worst.is_none() || dev > report.max_deviation {
            report.max_deviation = dev;
            report.worst = Some(w);
        }
    }
    Ok(report)
}
