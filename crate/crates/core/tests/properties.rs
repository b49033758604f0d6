mod common;

use common::*;
use msa_core::algebra::{self, AlphabetPolicy, Side};
use msa_core::diagonalize::{
    approx_diagonalize, make_asd, perturb_jordan_nonzero, perturb_jordan_zero, power_error_sweep,
    simultaneous_triangularize, JordanBlock,
};
use msa_core::learn::{
    logpolar_mul, ComplexMultisetModel, DeepSetsBaseline, Head, LogPolarComplex, Model,
};
use msa_core::linalg::{self, CMatrix};
use msa_core::posenc::{self, PolarPair, PolarParams};
use msa_core::{Multiset, WeightedAutomaton};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// `PROPTEST_CASES`, when set, overrides the per-block default.
fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases: std::env::var("PROPTEST_CASES")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(cases),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn restrict(w: &Multiset, alphabet: &[String]) -> Multiset {
    w.restricted(|s| alphabet.iter().any(|a| a == s))
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn commuting_weights_ignore_order(seed in any::<u64>(), d in 1usize..=3, m in 1usize..=3) {
        let mut r = rng(seed);
        let alphabet = symbols(m);
        let a = commuting(&mut r, d, &alphabet);
        let names: Vec<&str> = alphabet.iter().map(String::as_str).collect();
        for w in algebra::multisets_up_to(&names, 6).into_iter().step_by(3) {
            let reference = a.weight(&w).unwrap();
            for v in a.weight_by_permutation_oracle(&w, 4, seed).unwrap() {
                prop_assert!(relative_gap(reference, v) <= 1e-8, "{w:?}: {reference} vs {v}");
            }
        }
    }

    #[test]
    fn weight_is_linear_in_end_weights(seed in any::<u64>(), d in 1usize..=4) {
        let mut r = rng(seed);
        let a = commuting(&mut r, d, &symbols(2));
        let c = complex(&mut r);
        let w = Multiset::from_counts([("a", r.random_range(0..4)), ("b", r.random_range(0..4))]);
        let base = a.weight(&w).unwrap();
        for side in [Side::Initial, Side::Final] {
            let scaled = algebra::scale(&a, c, side).weight(&w).unwrap();
            prop_assert!((scaled - base * c).norm() <= 1e-12 * (1.0 + (base * c).norm()));
        }
    }

    #[test]
    fn forward_weights_follow_the_recurrence(seed in any::<u64>(), d in 1usize..=4) {
        let mut r = rng(seed);
        let a = commuting(&mut r, d, &symbols(3));
        let w = Multiset::from_counts([("a", r.random_range(0..5)), ("c", r.random_range(0..5))]);
        for s in ["a", "b", "c"] {
            let lhs = a.forward_weights(&w.with(s)).unwrap();
            let rhs = a.forward_weights(&w).unwrap() * a.mu(s).unwrap();
            prop_assert!((lhs - &rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn direct_sum_adds_and_shuffle_multiplies(seed in any::<u64>(), da in 1usize..=3, db in 1usize..=3) {
        let mut r = rng(seed);
        let (sa, sb) = (vec!["a".to_string()], vec!["b".to_string(), "c".to_string()]);
        let a = commuting(&mut r, da, &sa);
        let b = commuting(&mut r, db, &sb);
        let sum = algebra::direct_sum(&a, &b, AlphabetPolicy::PadWithZeros).unwrap();
        let prod = algebra::shuffle(&a, &b, AlphabetPolicy::PadWithZeros).unwrap();
        prop_assert_eq!(sum.dim(), da + db);
        prop_assert_eq!(prod.dim(), da * db);
        for w in algebra::multisets_up_to(&["a", "b", "c"], 6) {
            let (wa, wb) = (a.weight(&w), b.weight(&w));
            let expected_sum = wa.as_ref().map_or(linalg::ZERO, |x| *x) + wb.as_ref().map_or(linalg::ZERO, |x| *x);
            let ra = a.weight(&restrict(&w, &sa)).unwrap();
            let rb = b.weight(&restrict(&w, &sb)).unwrap();
            // ⊕ is checked only where both sides read every symbol of w.
            if wa.is_ok() && wb.is_ok() {
                prop_assert!(relative_gap(expected_sum, sum.weight(&w).unwrap()) <= 1e-8);
            }
            prop_assert!(relative_gap(ra * rb, prod.weight(&w).unwrap()) <= 1e-8, "{w:?}");
        }
    }

    #[test]
    fn direct_sum_adds_on_a_shared_alphabet(seed in any::<u64>(), da in 1usize..=3, db in 1usize..=3) {
        let mut r = rng(seed);
        let alphabet = symbols(2);
        let a = commuting(&mut r, da, &alphabet);
        let b = commuting(&mut r, db, &alphabet);
        let sum = algebra::direct_sum(&a, &b, AlphabetPolicy::Strict).unwrap();
        for w in algebra::multisets_up_to(&["a", "b"], 6) {
            let expected = a.weight(&w).unwrap() + b.weight(&w).unwrap();
            prop_assert!(relative_gap(expected, sum.weight(&w).unwrap()) <= 1e-8);
        }
    }

    #[test]
    fn change_of_basis_keeps_weights(seed in any::<u64>(), d in 1usize..=4) {
        let mut r = rng(seed);
        let a = commuting(&mut r, d, &symbols(2));
        let p = well_conditioned(&mut r, d);
        let b = algebra::change_of_basis(&a, &p).unwrap();
        let report = algebra::equivalent(&a, &b, 5, 1e-8).unwrap();
        prop_assert!(report.equivalent, "{report:?}");
    }

    #[test]
    fn kronecker_conjugation(seed in any::<u64>(), d1 in 1usize..=3, d2 in 1usize..=3) {
        let mut r = rng(seed);
        let (a, b) = (matrix(&mut r, d1), matrix(&mut r, d2));
        let (p1, p2) = (well_conditioned(&mut r, d1), well_conditioned(&mut r, d2));
        let (i1, _) = linalg::invert(&p1, 1e12).unwrap();
        let (i2, _) = linalg::invert(&p2, 1e12).unwrap();
        let p = linalg::kron(&p1, &p2);
        let (pi, _) = linalg::invert(&p, 1e12).unwrap();
        let lhs = &p * linalg::kron_sum(&a, &b) * pi;
        let rhs = linalg::kron_sum(&(&p1 * &a * i1), &(&p2 * &b * i2));
        prop_assert!(linalg::frobenius(&(lhs - rhs)) <= 1e-9);
    }

    #[test]
    fn kronecker_sum_norm_bound(seed in any::<u64>(), d1 in 1usize..=4, d2 in 1usize..=4) {
        let mut r = rng(seed);
        let (e1, e2) = (matrix(&mut r, d1), matrix(&mut r, d2));
        let lhs = linalg::frobenius(&linalg::kron_sum(&e1, &e2));
        let rhs = linalg::frobenius(&e1) * d2 as f64 + d1 as f64 * linalg::frobenius(&e2);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn combining_commuting_automata_stays_commuting(seed in any::<u64>(), da in 1usize..=3, db in 1usize..=3) {
        let mut r = rng(seed);
        let alphabet = symbols(2);
        let a = commuting(&mut r, da, &alphabet);
        let b = commuting(&mut r, db, &alphabet);
        let slack = 1e-12 + 1e-12 * (a.dim() * b.dim()) as f64;
        let sum = algebra::direct_sum(&a, &b, AlphabetPolicy::Strict).unwrap();
        prop_assert!(sum.commutation_defect() <= a.commutation_defect() + b.commutation_defect() + slack);
        let prod = algebra::shuffle(&a, &b, AlphabetPolicy::Strict).unwrap();
        let bound = (db as f64).sqrt() * a.commutation_defect() + (da as f64).sqrt() * b.commutation_defect();
        prop_assert!(prod.commutation_defect() <= bound + slack);
    }

    #[test]
    fn approximate_diagonalization_contract(seed in any::<u64>(), d in 1usize..=5, eps in 1e-6f64..1e-1) {
        let mut r = rng(seed);
        // Half the cases are defective: a random matrix with a Jordan block spliced in.
        let a = if seed % 2 == 0 {
            matrix(&mut r, d)
        } else {
            let j = JordanBlock::new(complex(&mut r), d).matrix();
            let p = well_conditioned(&mut r, d);
            let (pi, _) = linalg::invert(&p, 1e12).unwrap();
            &p * j * pi
        };
        let res = approx_diagonalize(&a, eps, seed).unwrap();
        prop_assert!(res.e_norm <= eps);
        let target = &a + &res.e;
        let err = linalg::frobenius(&(res.reconstruct().unwrap() - &target));
        // Rounding in P·D·P⁻¹ grows with the conditioning of the eigenbasis.
        let tol = 1e-12 * res.kappa.max(1.0) * linalg::frobenius(&target).max(1.0);
        prop_assert!(err <= tol, "reconstruction error {err} > {tol}");
    }

    #[test]
    fn nonzero_jordan_block_relative_bound(seed in any::<u64>(), k in 1usize..=5, modulus in 0.5f64..2.0, eps in 1e-4f64..1e-1) {
        let mut r = rng(seed);
        let lambda = Complex64::from_polar(modulus, r.random_range(0.0..std::f64::consts::TAU));
        let block = JordanBlock::new(lambda, k);
        let dmat = perturb_jordan_nonzero(&block, eps, seed).unwrap();
        let sweep = power_error_sweep(&block.matrix(), &dmat, 50, 0.5, eps).unwrap();
        prop_assert!(sweep.iter().all(|row| !row.violated), "{:?}", sweep.iter().find(|x| x.violated));
    }

    #[test]
    fn nilpotent_block_absolute_bound(seed in any::<u64>(), d in 1usize..=5, r_idx in 0usize..2, eps in 1e-4f64..1.0) {
        let r = [0.5, 0.9][r_idx];
        let block = JordanBlock::nilpotent(d);
        let dmat = perturb_jordan_zero(d, eps, r, seed).unwrap();
        let sweep = power_error_sweep(&block.matrix(), &dmat, 60, r, eps).unwrap();
        prop_assert!(sweep.iter().all(|row| !row.violated));
    }

    #[test]
    fn triangularizing_keeps_weights(seed in any::<u64>(), d in 1usize..=4, m in 1usize..=3) {
        let mut r = rng(seed);
        let a = commuting(&mut r, d, &symbols(m));
        let mats: Vec<CMatrix> = a.transitions().values().cloned().collect();
        let tri = simultaneous_triangularize(&mats, 1e-8).unwrap();
        for (m0, t) in mats.iter().zip(&tri.forms) {
            let back = tri.p.adjoint() * m0 * &tri.p;
            prop_assert!((back - t).norm() <= 1e-8 * linalg::frobenius(m0).max(1.0));
        }
        let b = algebra::change_of_basis_with_inverse(&a, &tri.p.adjoint(), &tri.p);
        prop_assert!(algebra::equivalent(&a, &b, 4, 1e-8).unwrap().equivalent);
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn asd_construction_is_equivalent(seed in any::<u64>(), d in 1usize..=3, m in 1usize..=2) {
        let mut r = rng(seed);
        let a = commuting_triangular(&mut r, d, &symbols(m));
        let b = make_asd(&a, 1e-10).unwrap();
        prop_assert_eq!(b.dim() as u128, msa_core::diagonalize::asd_state_count(m, d).unwrap());
        let report = algebra::equivalent(&a, &b, 4, 1e-6).unwrap();
        prop_assert!(report.equivalent, "{report:?}");
    }

    #[test]
    fn models_ignore_input_order(seed in any::<u64>(), len in 0usize..40) {
        let mut r = rng(seed);
        let complex = ComplexMultisetModel::new(11, 8, Head::Dense, true, &mut r).unwrap();
        let deepsets = DeepSetsBaseline::new(11, 10, 4, Default::default(), &mut r).unwrap();
        let seq: Vec<usize> = (0..len).map(|_| r.random_range(0..11)).collect();
        let mut shuffled = seq.clone();
        shuffled.shuffle(&mut r);
        prop_assert_eq!(complex.predict(&seq).unwrap(), complex.predict(&shuffled).unwrap());
        prop_assert_eq!(deepsets.predict(&seq).unwrap(), deepsets.predict(&shuffled).unwrap());
    }

    #[test]
    fn logpolar_chains_stay_on_the_unit_circle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut acc = LogPolarComplex::ONE;
        let mut angle = 0.0;
        for _ in 0..1000 {
            let z = LogPolarComplex::normalized(r.random_range(-0.1..0.1), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
            angle += z.angle();
            acc = logpolar_mul(acc, z);
            prop_assert!(acc.unit_drift() <= 1e-9);
        }
        let expected = Complex64::from_polar(1.0, angle);
        prop_assert!((Complex64::new(acc.a, acc.b) - expected).norm() <= 1e-9);
    }

    #[test]
    fn long_products_neither_underflow_nor_overflow(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut acc = LogPolarComplex::ONE;
        let mut log_modulus = 0.0;
        for _ in 0..95 {
            let modulus: f64 = if r.random_bool(0.5) { r.random_range(0.1..0.11) } else { r.random_range(9.0..10.0) };
            let z = Complex64::from_polar(modulus.powi(4), r.random_range(0.0..std::f64::consts::TAU));
            log_modulus += z.norm().ln();
            acc = logpolar_mul(acc, LogPolarComplex::from_complex(z));
        }
        prop_assert!(acc.r.is_finite() && acc.unit_drift() <= 1e-9);
        prop_assert!((acc.r - log_modulus).abs() <= 1e-9 * log_modulus.abs().max(1.0));
    }

    #[test]
    fn rotation_powers_keep_modulus(seed in any::<u64>(), n in 0usize..=200) {
        let mut r = rng(seed);
        let theta = r.random_range(-3.0..3.0);
        let params = PolarParams { pairs: vec![PolarPair { s: 1.0, phi: 0.0, r: 1.0, theta }] };
        let m = posenc::polar_automaton(&params).unwrap();
        let block = m.mu(posenc::UNARY_SYMBOL).unwrap();
        let power = linalg::mat_pow(block, n as u64);
        let spectral = power.map(|z| z.re).singular_values()[0];
        prop_assert!((spectral - 1.0).abs() <= 1e-9);
        let w = Multiset::from_counts([(posenc::UNARY_SYMBOL, n)]);
        let step = m.forward_weights(&w).unwrap() * block;
        let next = m.forward_weights(&w.with(posenc::UNARY_SYMBOL)).unwrap();
        prop_assert!((next - step).norm() <= 1e-12);
    }
}

#[test]
fn string_automata_depend_on_order() {
    let mut r = rng(5);
    let a: WeightedAutomaton = string_automaton(&mut r, 3, &symbols(2));
    let w = Multiset::from_counts([("a", 1), ("b", 1)]);
    let vals = a.weight_by_permutation_oracle(&w, 2, 1).unwrap();
    assert_eq!(vals.len(), 2);
    assert!((vals[0] - vals[1]).norm() > 1e-6);
}
