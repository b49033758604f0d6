//! Diagonal perturbations of Jordan blocks that keep matrix powers close.
//!
//! For a block with nonzero eigenvalue the diagonal is pulled towards zero by
//! distinct factors in `(0, ε]`, which keeps the relative error of the `n`-th
//! power below `nε`. For a nilpotent block the diagonal is filled with
//! distinct values in `(0, δ]`, `δ = min{r/2, (r/2)^d ε/d}`, which keeps the
//! absolute error of the `n`-th power below `rⁿε`.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JordanBlock {
    pub eigenvalue: Complex64,
    pub size: usize,
}

impl JordanBlock {
    pub fn new(eigenvalue: Complex64, size: usize) -> Self {
        Self { eigenvalue, size }
    }

    pub fn nilpotent(size: usize) -> Self {
        Self {
            eigenvalue: linalg::ZERO,
            size,
        }
    }

    pub fn matrix(&self) -> CMatrix {
        let k = self.size;
        CMatrix::from_fn(k, k, |i, j| {
            if i == j {
                self.eigenvalue
            } else if j == i + 1 {
                linalg::ONE
            } else {
                linalg::ZERO
            }
        })
    }
}

/// `count` distinct fractions `(j+1)/count` of `top`, shuffled by `seed`.
fn distinct_levels(count: usize, denom: usize, top: f64, seed: u64) -> Vec<f64> {
    let mut levels: Vec<f64> = (0..count)
        .map(|j| top * (j + 1) as f64 / denom as f64)
        .collect();
    levels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    levels
}

/// Diagonal `D` with entries `−λ t_j`, `t_j` distinct in `(0, ε]`, so that
/// `J + D` is diagonalizable and `‖(J+D)ⁿ − Jⁿ‖ / ‖Jⁿ‖ ≤ nε`.
///
/// The `t_j` are `ε (j+1)/(k+1)`; `ε` is capped at 1 so no diagonal entry
/// changes sign.
pub fn perturb_jordan_nonzero(block: &JordanBlock, eps: f64, seed: u64) -> Result<CMatrix> {
    if block.eigenvalue.norm() == 0.0 {
        return Err(Error::InvalidArgument(
            "block eigenvalue must be nonzero".into(),
        ));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let k = block.size;
    let t = distinct_levels(k, k + 1, eps.min(1.0), seed);
    let entries: Vec<Complex64> = t.iter().map(|&tj| -block.eigenvalue * tj).collect();
    Ok(linalg::diag(&entries))
}

/// `δ = min{r/2, (r/2)^d · ε/d}` for a nilpotent block of size `d`.
pub fn nilpotent_delta(size: usize, eps: f64, r: f64) -> f64 {
    let half = r / 2.0;
    half.min(half.powi(size as i32) * eps / size as f64)
}

/// Diagonal `D` with distinct entries in `(0, δ]` so that `J + D` is
/// diagonalizable and `‖(J+D)ⁿ − Jⁿ‖ ≤ rⁿε` for every `n ≥ 0`.
pub fn perturb_jordan_zero(size: usize, eps: f64, r: f64, seed: u64) -> Result<CMatrix> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "r must lie in (0, 1), got {r}"
        )));
    }
    if !(eps > 0.0) || size == 0 {
        return Err(Error::InvalidArgument(
            "eps must be positive and the block nonempty".into(),
        ));
    }
    let delta = nilpotent_delta(size, eps, r);
    let t = distinct_levels(size, size, delta, seed);
    let entries: Vec<Complex64> = t.iter().map(|&x| linalg::c(x, 0.0)).collect();
    Ok(linalg::diag(&entries))
}

/// `‖A^d‖_F ≤ 1e-12 · max(1, ‖A‖_F^d)`.
pub fn is_nilpotent(a: &CMatrix) -> bool {
    let d = a.nrows();
    let lhs = linalg::frobenius(&linalg::mat_pow(a, d as u64));
    lhs <= 1e-12 * linalg::frobenius(a).powi(d as i32).max(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerErrorReport {
    pub n: u64,
    /// `‖(A+E)ⁿ − Aⁿ‖_F`
    pub abs_err: f64,
    /// `abs_err / ‖Aⁿ‖_F`, absent when `Aⁿ = 0`.
    pub rel_err: Option<f64>,
    /// `rⁿε` for nilpotent `A` (compared with `abs_err`), otherwise `nε`
    /// (compared with `rel_err`).
    pub bound: f64,
    pub violated: bool,
}

impl PowerErrorReport {
    pub const CSV_HEADER: &'static str = "n,abs_err,rel_err,bound,violated";

    pub fn csv_row(&self) -> String {
        let rel = self.rel_err.map(|x| format!("{x:e}")).unwrap_or_default();
        format!(
            "{},{:e},{},{:e},{}",
            self.n, self.abs_err, rel, self.bound, self.violated
        )
    }
}

/// Errors of `(A+E)ⁿ` against `Aⁿ` for `n = 0..=n_max`.
///
/// The nilpotent branch checks `abs_err ≤ rⁿε`, the other branch checks
/// `rel_err ≤ nε`. Both allow a rounding slack of `16·d·n·u·‖Aⁿ‖_F`.
pub fn power_error_sweep(
    a: &CMatrix,
    e: &CMatrix,
    n_max: u64,
    r: f64,
    eps: f64,
) -> Result<Vec<PowerErrorReport>> {
    if a.shape() != e.shape() || !a.is_square() {
        return Err(Error::Dimension(
            "A and E must be square and of equal size".into(),
        ));
    }
    let d = a.nrows();
    let nilpotent = is_nilpotent(a);
    let perturbed = a + e;
    let mut pa = CMatrix::identity(d, d);
    let mut pp = CMatrix::identity(d, d);
    let mut out = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        if n > 0 {
            pa = &pa * a;
            pp = &pp * &perturbed;
        }
        let abs_err = linalg::frobenius(&(&pp - &pa));
        let base = linalg::frobenius(&pa);
        let rel_err = (base > 0.0).then(|| abs_err / base);
        let slack = 16.0 * d as f64 * n as f64 * f64::EPSILON * base;
        let (bound, violated) = if nilpotent {
            let bound = r.powi(n as i32) * eps;
            (bound, abs_err > bound + slack)
        } else {
            let bound = n as f64 * eps;
            (bound, abs_err > bound * base + slack)
        };
        out.push(PowerErrorReport {
            n,
            abs_err,
            rel_err,
            bound,
            violated,
        });
    }
    Ok(out)
}

/// An explicit Jordan decomposition `A = P J P⁻¹` with `J` given by blocks.
#[derive(Clone, Debug)]
pub struct JordanForm {
    pub p: CMatrix,
    pub blocks: Vec<JordanBlock>,
}

impl JordanForm {
    pub fn new(p: CMatrix, blocks: Vec<JordanBlock>) -> Result<Self> {
        let total: usize = blocks.iter().map(|b| b.size).sum();
        if p.shape() != (total, total) {
            return Err(Error::Dimension(format!(
                "basis is {}x{} but blocks cover {total} states",
                p.nrows(),
                p.ncols()
            )));
        }
        Ok(Self { p, blocks })
    }

    pub fn jordan_matrix(&self) -> CMatrix {
        self.blocks.iter().fold(CMatrix::zeros(0, 0), |acc, b| {
            linalg::block_diag(&acc, &b.matrix())
        })
    }

    pub fn matrix(&self) -> Result<CMatrix> {
        let (p_inv, _) = linalg::invert(&self.p, f64::INFINITY)?;
        Ok(&self.p * self.jordan_matrix() * p_inv)
    }

    /// `E = P D P⁻¹` with per-block `D_j` from the two block lemmas, with the
    /// error budget split over blocks and the Frobenius condition number of `P`
    /// so that `A + E` meets the power bounds checked by
    /// [`power_error_sweep`].
    pub fn bound_perturbation(&self, eps: f64, r: f64, seed: u64) -> Result<CMatrix> {
        let (p_inv, _) = linalg::invert(&self.p, f64::INFINITY)?;
        let kappa = linalg::frobenius(&self.p) * linalg::frobenius(&p_inv);
        let count = self.blocks.len() as f64;
        let nilpotent = self.blocks.iter().all(|b| b.eigenvalue.norm() == 0.0);
        let radius = self
            .blocks
            .iter()
            .map(|b| b.eigenvalue.norm())
            .fold(0.0, f64::max);
        let mut d = CMatrix::zeros(0, 0);
        for (i, block) in self.blocks.iter().enumerate() {
            let block_seed = seed.wrapping_add(i as u64);
            let dj = if nilpotent {
                perturb_jordan_zero(block.size, eps / (kappa * count), r, block_seed)?
            } else {
                let budget = eps / (2.0 * count * kappa * kappa);
                if block.eigenvalue.norm() == 0.0 {
                    perturb_jordan_zero(block.size, budget, r.min(radius), block_seed)?
                } else {
                    perturb_jordan_nonzero(block, budget, block_seed)?
                }
            };
            d = linalg::block_diag(&d, &dj);
        }
        Ok(&self.p * d * p_inv)
    }
}
