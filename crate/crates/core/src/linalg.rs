//! Dense complex matrix helpers shared by the automaton modules.

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type CRowVector = RowDVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest condition number accepted when inverting a change-of-basis matrix.
pub const MAX_CONDITION: f64 = 1e12;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    DMatrix::from_row_slice(rows, cols, data).map(|x| c(x, 0.0))
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm_1(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `m^n` by repeated squaring.
pub fn mat_pow(m: &CMatrix, mut n: u64) -> CMatrix {
    let d = m.nrows();
    let mut result = CMatrix::identity(d, d);
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker sum `a ⊗ I + I ⊗ b`.
pub fn kron_sum(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let ia = CMatrix::identity(a.nrows(), a.ncols());
    let ib = CMatrix::identity(b.nrows(), b.ncols());
    a.kronecker(&ib) + ia.kronecker(b)
}

/// Block-diagonal `a ⊕ b`.
pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMatrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

pub fn diag(entries: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(entries))
}

/// Inverse by partial-pivoting LU, together with the 1-norm condition number.
///
/// Fails when the matrix is singular or its condition number exceeds `max_cond`.
pub fn invert(m: &CMatrix, max_cond: f64) -> Result<(CMatrix, f64)> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "cannot invert a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let inv = m.clone().lu().try_inverse().ok_or(Error::IllConditioned {
        cond: f64::INFINITY,
    })?;
    let cond = norm_1(m) * norm_1(&inv);
    if !cond.is_finite() || cond > max_cond {
        return Err(Error::IllConditioned { cond });
    }
    Ok((inv, cond))
}

/// Complex Schur form `a = q t qᴴ` with `q` unitary and `t` upper triangular.
pub fn schur(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let s = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .ok_or(Error::NoConvergence)?;
    let (q, mut t) = s.unpack();
    for j in 0..t.ncols() {
        for i in (j + 1)..t.nrows() {
            t[(i, j)] = ZERO;
        }
    }
    Ok((q, t))
}

/// Unit-norm eigenvectors of an upper-triangular matrix, one per column.
///
/// Equal diagonal entries are separated by a tiny floor on the divisor, so the
/// result is always finite; callers judge quality from its conditioning.
pub fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    let d = t.nrows();
    let scale = frobenius(t).max(f64::MIN_POSITIVE);
    let floor = f64::EPSILON * scale;
    let mut x = CMatrix::zeros(d, d);
    for i in 0..d {
        let lambda = t[(i, i)];
        x[(i, i)] = ONE;
        for j in (0..i).rev() {
            let mut s = ZERO;
            for l in (j + 1)..=i {
                s += t[(j, l)] * x[(l, i)];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < floor {
                denom = c(floor, 0.0);
            }
            x[(j, i)] = -s / denom;
        }
        let n = x.column(i).norm();
        x.column_mut(i).unscale_mut(n);
    }
    x
}

pub fn min_pairwise_gap(values: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            gap = gap.min((values[i] - values[j]).norm());
        }
    }
    gap
}

pub fn spectral_radius(values: &[Complex64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius condition number `‖p‖_F ‖p⁻¹‖_F`; infinite when `p` is singular.
pub fn frobenius_condition(p: &CMatrix) -> f64 {
    match p.clone().lu().try_inverse() {
        Some(inv) => frobenius(p) * frobenius(&inv),
        None => f64::INFINITY,
    }
}
