//! Seeded random automata shared by the property and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use msa_core::linalg::{self, CMatrix, CRowVector, CVector};
use msa_core::{Kind, WeightedAutomaton};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn matrix(rng: &mut impl Rng, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| complex(rng))
}

/// `I + 0.3·G`, comfortably invertible.
pub fn well_conditioned(rng: &mut impl Rng, d: usize) -> CMatrix {
    CMatrix::identity(d, d) + matrix(rng, d) * Complex64::new(0.3 / d as f64, 0.0)
}

pub fn symbols(m: usize) -> Vec<String> {
    (0..m)
        .map(|i| char::from(b'a' + i as u8).to_string())
        .collect()
}

fn weights(rng: &mut impl Rng, d: usize) -> (CRowVector, CVector) {
    (
        CRowVector::from_fn(d, |_, _| complex(rng)),
        CVector::from_fn(d, |_, _| complex(rng)),
    )
}

/// Commuting transitions `P Dₛ P⁻¹` with diagonal entries of modulus ≤ 1.
pub fn commuting(rng: &mut impl Rng, d: usize, alphabet: &[String]) -> WeightedAutomaton {
    let p = well_conditioned(rng, d);
    let (p_inv, _) = linalg::invert(&p, 1e12).expect("well conditioned");
    let mu = alphabet
        .iter()
        .map(|s| {
            let diag: Vec<Complex64> = (0..d).map(|_| complex(rng) * 0.7).collect();
            (s.clone(), &p * linalg::diag(&diag) * &p_inv)
        })
        .collect();
    let (lambda, rho) = weights(rng, d);
    WeightedAutomaton::new(lambda, mu, rho, Kind::Multiset).expect("commuting by construction")
}

/// Upper-triangular commuting transitions: each is `αI + βT + γT²` for one
/// shared strictly-upper-plus-diagonal `T`, so they are generally not
/// simultaneously diagonalizable.
pub fn commuting_triangular(
    rng: &mut impl Rng,
    d: usize,
    alphabet: &[String],
) -> WeightedAutomaton {
    let mut t = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            t[(i, j)] = complex(rng) * 0.5;
        }
    }
    let t2 = &t * &t;
    let mu = alphabet
        .iter()
        .map(|s| {
            let (a, b, c) = (complex(rng) * 0.5, complex(rng) * 0.5, complex(rng) * 0.3);
            (s.clone(), CMatrix::identity(d, d) * a + &t * b + &t2 * c)
        })
        .collect();
    let (lambda, rho) = weights(rng, d);
    WeightedAutomaton::new(lambda, mu, rho, Kind::Multiset)
        .expect("polynomials in one matrix commute")
}

/// Arbitrary (generally non-commuting) transitions.
pub fn string_automaton(rng: &mut impl Rng, d: usize, alphabet: &[String]) -> WeightedAutomaton {
    let mu: BTreeMap<String, CMatrix> = alphabet
        .iter()
        .map(|s| (s.clone(), matrix(rng, d) * linalg::c(0.5, 0.0)))
        .collect();
    let (lambda, rho) = weights(rng, d);
    WeightedAutomaton::new(lambda, mu, rho, Kind::String).expect("valid shapes")
}

pub fn relative_gap(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (1.0 + a.norm())
}
