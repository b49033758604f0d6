//! Rewriting a multiset automaton as a direct sum of shuffle products of unary
//! automata, whose transition matrices are approximately simultaneously
//! diagonalizable.
//!
//! With upper-triangular transitions, the weight of `w` is a sum over state
//! sequences `q₀ ≤ q₁ ≤ … ≤ q_m` of
//! `λ_{q₀} [μ(a₁)^{k₁}]_{q₀q₁} ⋯ [μ(a_m)^{k_m}]_{q_{m−1}q_m} ρ_{q_m}`,
//! and each factor is the weight of a small unary automaton.

use rayon::prelude::*;

use crate::algebra::{self, AlphabetPolicy, Side};
use crate::automaton::{Kind, WeightedAutomaton, DEFAULT_COMMUTE_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CRowVector, CVector};

use super::triangular::{is_upper_triangular, simultaneous_triangularize};

#[derive(Clone, Copy, Debug)]
pub struct AsdOptions {
    /// Largest commutation defect accepted in the input.
    pub tol: f64,
    /// Drop terms whose `λ_{q₀}` or `ρ_{q_m}` is exactly zero. The weights
    /// are unchanged but the state count falls below `C(2m+d, d−1)`.
    pub prune: bool,
}

impl Default for AsdOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_COMMUTE_TOL,
            prune: false,
        }
    }
}

/// `C(2m+d, d−1)`, the number of states produced by [`make_asd`] for `d`
/// states and `m` symbols.
pub fn asd_state_count(m: usize, d: usize) -> Result<u128> {
    if m == 0 || d == 0 {
        return Err(Error::InvalidArgument(
            "asd_state_count needs m ≥ 1 and d ≥ 1".into(),
        ));
    }
    let (n, k) = ((2 * m + d) as u128, (d - 1) as u128);
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc · (n−i) is divisible by i+1 at every step.
        acc = acc
            .checked_mul(n - i)
            .ok_or_else(|| Error::InvalidArgument(format!("C({n}, {k}) overflows u128")))?
            / (i + 1);
    }
    Ok(acc)
}

/// The unary automaton giving `[μ(a)ᵏ]_{q,r}` on `aᵏ`, restricted to states
/// `q..=r` of an upper-triangular automaton.
pub fn unary_section(
    m: &WeightedAutomaton,
    q: usize,
    symbol: &str,
    r: usize,
) -> Result<WeightedAutomaton> {
    if q > r {
        return Err(Error::InvalidArgument(format!(
            "section needs q ≤ r, got q = {q}, r = {r}"
        )));
    }
    if r >= m.dim() {
        return Err(Error::Dimension(format!(
            "state {r} out of range for {} states",
            m.dim()
        )));
    }
    let mu = m
        .mu(symbol)
        .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))?;
    if !is_upper_triangular(std::slice::from_ref(mu), 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "μ({symbol}) is not upper triangular"
        )));
    }
    let span = r - q + 1;
    let block = mu.view((q, q), (span, span)).into_owned();
    let mut lambda = CRowVector::zeros(span);
    lambda[0] = linalg::ONE;
    let mut rho = CVector::zeros(span);
    rho[span - 1] = linalg::ONE;
    let transitions = std::iter::once((symbol.to_string(), block)).collect();
    Ok(WeightedAutomaton::from_parts_unchecked(
        lambda,
        transitions,
        rho,
        Kind::Multiset,
    ))
}

/// Nondecreasing sequences of length `len` over `0..d`, in lexicographic order.
pub fn nondecreasing_sequences(d: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if d == 0 {
        return out;
    }
    let mut seq = vec![0usize; len];
    loop {
        out.push(seq.clone());
        let Some(i) = (0..len).rev().find(|&i| seq[i] + 1 < d) else {
            return out;
        };
        let v = seq[i] + 1;
        seq[i..].iter_mut().for_each(|x| *x = v);
    }
}

/// Puts a commuting automaton into upper-triangular form by a unitary change
/// of basis (identity when already triangular).
pub fn triangular_form(m: &WeightedAutomaton, tol: f64) -> Result<WeightedAutomaton> {
    let mats: Vec<CMatrix> = m.transitions().values().cloned().collect();
    if is_upper_triangular(&mats, 0.0) {
        return Ok(m.clone());
    }
    let tri = simultaneous_triangularize(&mats, tol)?;
    let p_adj = tri.p.adjoint();
    let mu = m.transitions().keys().cloned().zip(tri.forms).collect();
    Ok(WeightedAutomaton::from_parts_unchecked(
        m.lambda() * &tri.p,
        mu,
        &p_adj * m.rho(),
        Kind::Multiset,
    ))
}

/// Builds an equivalent automaton `⊕ λ_{q₀} M_{q₀,a₁,q₁} ⧢ ⋯ ⧢ M_{q_{m−1},a_m,q_m} ρ_{q_m}`
/// with [`asd_state_count`] states.
pub fn make_asd(m: &WeightedAutomaton, tol: f64) -> Result<WeightedAutomaton> {
    make_asd_with(
        m,
        &AsdOptions {
            tol,
            ..AsdOptions::default()
        },
    )
}

pub fn make_asd_with(m: &WeightedAutomaton, opts: &AsdOptions) -> Result<WeightedAutomaton> {
    let defect = m.commutation_defect();
    if defect > opts.tol {
        return Err(Error::NotCommuting {
            defect,
            tol: opts.tol,
        });
    }
    let symbols: Vec<String> = m.alphabet().iter().map(|s| s.to_string()).collect();
    if symbols.is_empty() {
        return Err(Error::InvalidArgument(
            "make_asd needs at least one symbol".into(),
        ));
    }
    let tri = triangular_form(m, opts.tol)?;
    let d = tri.dim();
    let sequences: Vec<Vec<usize>> = nondecreasing_sequences(d, symbols.len() + 1)
        .into_iter()
        .filter(|q| {
            !opts.prune
                || (tri.lambda()[q[0]] != linalg::ZERO
                    && tri.rho()[q[symbols.len()]] != linalg::ZERO)
        })
        .collect();

    let terms: Vec<WeightedAutomaton> = sequences
        .par_iter()
        .map(|q| build_term(&tri, &symbols, q))
        .collect::<Result<_>>()?;
    direct_sum_all(&terms, &symbols)
}

fn build_term(
    tri: &WeightedAutomaton,
    symbols: &[String],
    q: &[usize],
) -> Result<WeightedAutomaton> {
    let mut term = unary_section(tri, q[0], &symbols[0], q[1])?;
    term = algebra::scale(&term, tri.lambda()[q[0]], Side::Initial);
    for (i, s) in symbols.iter().enumerate().skip(1) {
        let section = unary_section(tri, q[i], s, q[i + 1])?;
        term = algebra::shuffle(&term, &section, AlphabetPolicy::PadWithZeros)?;
    }
    Ok(algebra::scale(
        &term,
        tri.rho()[q[symbols.len()]],
        Side::Final,
    ))
}

/// Direct sum of many automata over the same alphabet, assembled in one pass.
fn direct_sum_all(terms: &[WeightedAutomaton], symbols: &[String]) -> Result<WeightedAutomaton> {
    let total: usize = terms.iter().map(WeightedAutomaton::dim).sum();
    let mut lambda = CRowVector::zeros(total);
    let mut rho = CVector::zeros(total);
    let mut mu: Vec<CMatrix> = symbols
        .iter()
        .map(|_| CMatrix::zeros(total, total))
        .collect();
    let mut offset = 0;
    for t in terms {
        let k = t.dim();
        lambda.columns_mut(offset, k).copy_from(t.lambda());
        rho.rows_mut(offset, k).copy_from(t.rho());
        for (s, big) in symbols.iter().zip(mu.iter_mut()) {
            let block = t.mu(s).ok_or_else(|| Error::UnknownSymbol(s.clone()))?;
            big.view_mut((offset, offset), (k, k)).copy_from(block);
        }
        offset += k;
    }
    let transitions = symbols.iter().cloned().zip(mu).collect();
    Ok(WeightedAutomaton::from_parts_unchecked(
        lambda,
        transitions,
        rho,
        Kind::Multiset,
    ))
}
