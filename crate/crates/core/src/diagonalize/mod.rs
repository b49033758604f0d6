//! Approximate diagonalization of transition matrices.
//!
//! [`approx_diagonalize`] perturbs a single matrix into a diagonalizable one.
//! The [`jordan`] submodule holds the explicit Jordan-block perturbations and
//! the power-error sweeps that measure how well powers are preserved, while
//! [`triangular`] and [`asd`] build, for a commuting family, an equivalent
//! automaton made of direct sums and shuffles of unary pieces.

pub mod asd;
pub mod jordan;
pub mod triangular;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

pub use asd::{asd_state_count, make_asd, unary_section, AsdOptions};
pub use jordan::{
    is_nilpotent, perturb_jordan_nonzero, perturb_jordan_zero, power_error_sweep, JordanBlock,
    JordanForm, PowerErrorReport,
};
pub use triangular::{simultaneous_triangularize, Triangularization};

/// Eigenvalues must be separated by more than this fraction of the spectral radius.
pub const GAP_THRESHOLD: f64 = 1e-8;
/// Largest accepted Frobenius condition number of the eigenvector basis.
pub const KAPPA_THRESHOLD: f64 = 1e10;
const MAX_RETRIES: usize = 10;

/// `A + E = P · diag(eigenvalues) · P⁻¹`.
#[derive(Clone, Debug)]
pub struct DiagonalizationResult {
    pub p: CMatrix,
    pub eigenvalues: Vec<Complex64>,
    pub e: CMatrix,
    pub e_norm: f64,
    pub kappa: f64,
}

impl DiagonalizationResult {
    /// `P · diag(eigenvalues) · P⁻¹`.
    pub fn reconstruct(&self) -> Result<CMatrix> {
        let (p_inv, _) = linalg::invert(&self.p, f64::INFINITY)?;
        Ok(&self.p * linalg::diag(&self.eigenvalues) * p_inv)
    }
}

fn accept(values: &[Complex64], p: &CMatrix) -> (bool, f64, f64) {
    let gap = linalg::min_pairwise_gap(values);
    let radius = linalg::spectral_radius(values);
    let kappa = linalg::frobenius_condition(p);
    let ok =
        (values.len() < 2 || gap > GAP_THRESHOLD * radius && gap > 0.0) && kappa < KAPPA_THRESHOLD;
    (ok, gap, kappa)
}

/// Finds `E` with `‖E‖_F ≤ eps` such that `A + E` has a full, well-conditioned
/// eigenbasis.
///
/// `E` is zero when `A` already has distinct eigenvalues and a basis with
/// condition number below [`KAPPA_THRESHOLD`]. The first fallback adds a
/// diagonal perturbation of norm `eps/2` in the Schur basis of `A`, which
/// separates repeated eigenvalues by about `eps`. That can leave a large
/// Jordan block with a badly conditioned basis, so later retries add a random
/// dense perturbation of the same norm instead; it splits a size-`k` block by
/// about `eps^{1/k}`.
pub fn approx_diagonalize(a: &CMatrix, eps: f64, seed: u64) -> Result<DiagonalizationResult> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let d = a.nrows();
    let (q, t) = linalg::schur(a)?;
    let values: Vec<Complex64> = t.diagonal().iter().copied().collect();
    let p = &q * linalg::triangular_eigenvectors(&t);
    let (ok, mut best_gap, kappa) = accept(&values, &p);
    if ok {
        return Ok(DiagonalizationResult {
            p,
            eigenvalues: values,
            e: CMatrix::zeros(d, d),
            e_norm: 0.0,
            kappa,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centre = (d as f64 - 1.0) / 2.0;
    let spread_norm = (0..d)
        .map(|j| (j as f64 - centre).powi(2))
        .sum::<f64>()
        .sqrt();
    for attempt in 0..MAX_RETRIES {
        let e = if attempt == 0 {
            let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            let step = 0.5 * eps / spread_norm;
            let shifts: Vec<Complex64> = (0..d)
                .map(|j| phase * (step * (j as f64 - centre)))
                .collect();
            &q * linalg::diag(&shifts) * q.adjoint()
        } else {
            let g = CMatrix::from_fn(d, d, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let norm = linalg::frobenius(&g);
            g * Complex64::new(0.5 * eps / norm, 0.0)
        };
        let (q2, t2) = linalg::schur(&(a + &e))?;
        let values: Vec<Complex64> = t2.diagonal().iter().copied().collect();
        let p = &q2 * linalg::triangular_eigenvectors(&t2);
        let (ok, gap, kappa) = accept(&values, &p);
        best_gap = best_gap.max(gap);
        if ok {
            let e_norm = linalg::frobenius(&e);
            return Ok(DiagonalizationResult {
                p,
                eigenvalues: values,
                e,
                e_norm,
                kappa,
            });
        }
    }
    Err(Error::DiagonalizationFailed {
        retries: MAX_RETRIES,
        gap: best_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{m1, m2};
    use crate::linalg::c;

    fn check_result(a: &CMatrix, r: &DiagonalizationResult, eps: f64) {
        assert!(r.e_norm <= eps);
        let target = a + &r.e;
        let err = linalg::frobenius(&(r.reconstruct().unwrap() - &target));
        assert!(
            err <= 1e-8 * linalg::frobenius(&target).max(1e-300),
            "reconstruction error {err}"
        );
    }

    #[test]
    fn cycle_is_already_diagonalizable() {
        let a = m1().mu("a").unwrap().clone();
        let r = approx_diagonalize(&a, 1e-3, 0).unwrap();
        assert_eq!(r.e_norm, 0.0);
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        for expect in [c(1.0, 0.0), w, w.conj()] {
            assert!(r.eigenvalues.iter().any(|z| (z - expect).norm() < 1e-12));
        }
        check_result(&a, &r, 1e-3);
    }

    #[test]
    fn nilpotent_block_needs_a_perturbation() {
        let a = m2().mu("b").unwrap().clone();
        let eps = 1e-4;
        let r = approx_diagonalize(&a, eps, 7).unwrap();
        assert!(r.e_norm > 0.0 && r.e_norm <= eps);
        // eigenvalues ±ε̃ for some small ε̃
        assert!((r.eigenvalues[0] + r.eigenvalues[1]).norm() < 1e-12);
        assert!(r.eigenvalues[0].norm() <= eps);
        check_result(&a, &r, eps);
    }

    #[test]
    fn diagonal_input_keeps_identity_basis() {
        let a = linalg::diag(&[c(1.0, 0.0), c(-2.0, 0.5), c(0.25, 0.0)]);
        let r = approx_diagonalize(&a, 1e-6, 0).unwrap();
        assert_eq!(r.e_norm, 0.0);
        // every column is a unit basis vector up to phase
        for j in 0..3 {
            let big = r.p.column(j).iter().filter(|z| z.norm() > 1e-12).count();
            assert_eq!(big, 1);
        }
    }

    #[test]
    fn rejects_bad_eps() {
        assert!(approx_diagonalize(&CMatrix::identity(2, 2), 0.0, 0).is_err());
    }

    #[test]
    fn identity_gets_split() {
        let a = CMatrix::identity(4, 4);
        let r = approx_diagonalize(&a, 1e-2, 3).unwrap();
        assert!(linalg::min_pairwise_gap(&r.eigenvalues) > 0.0);
        check_result(&a, &r, 1e-2);
    }
}
