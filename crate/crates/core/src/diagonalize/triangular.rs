//! Simultaneous upper triangularization of a commuting family by unitary
//! deflation: find a common eigenvector, rotate it onto the first basis
//! vector, and repeat on the trailing block.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Subdiagonal mass allowed in the returned forms, relative to `‖Aᵢ‖_F`.
pub const SUBDIAGONAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Triangularization {
    /// Unitary basis; `Pᴴ Aᵢ P` is upper triangular.
    pub p: CMatrix,
    /// The triangular forms with the (tiny) strictly lower part set to zero.
    pub forms: Vec<CMatrix>,
    /// Largest discarded strictly-lower entry, relative to `‖Aᵢ‖_F`.
    pub max_subdiagonal: f64,
}

fn lower_mass(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in (j + 1)..m.nrows() {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

fn relative_lower(m: &CMatrix, reference: &CMatrix) -> f64 {
    let scale = linalg::frobenius(reference);
    if scale == 0.0 {
        0.0
    } else {
        lower_mass(m) / scale
    }
}

fn zero_lower(mut m: CMatrix) -> CMatrix {
    for j in 0..m.ncols() {
        for i in (j + 1)..m.nrows() {
            m[(i, j)] = linalg::ZERO;
        }
    }
    m
}

/// True when every matrix is upper triangular up to `tol · ‖A‖_F`.
pub fn is_upper_triangular(matrices: &[CMatrix], tol: f64) -> bool {
    matrices.iter().all(|m| relative_lower(m, m) <= tol)
}

/// Triangularizes a commuting family by a unitary change of basis.
///
/// Already-triangular input returns `P = I`.
pub fn simultaneous_triangularize(matrices: &[CMatrix], tol: f64) -> Result<Triangularization> {
    let Some(first) = matrices.first() else {
        return Err(Error::InvalidArgument("empty matrix family".into()));
    };
    let n = first.nrows();
    if matrices.iter().any(|m| m.shape() != (n, n)) {
        return Err(Error::Dimension(
            "matrices must be square and of equal size".into(),
        ));
    }
    let mut defect: f64 = 0.0;
    for i in 0..matrices.len() {
        for j in (i + 1)..matrices.len() {
            let comm = &matrices[i] * &matrices[j] - &matrices[j] * &matrices[i];
            defect = defect.max(linalg::frobenius(&comm));
        }
    }
    if defect > tol {
        return Err(Error::NotCommuting { defect, tol });
    }

    if is_upper_triangular(matrices, 0.0) {
        return Ok(Triangularization {
            p: CMatrix::identity(n, n),
            forms: matrices.to_vec(),
            max_subdiagonal: 0.0,
        });
    }

    let mut p = CMatrix::identity(n, n);
    let mut work: Vec<CMatrix> = matrices.to_vec();
    for k in 0..n.saturating_sub(1) {
        let m = n - k;
        let sub: Vec<CMatrix> = work
            .iter()
            .map(|a| a.view((k, k), (m, m)).into_owned())
            .collect();
        let v = common_eigenvector(&sub)?;
        let u = complete_basis(&v);
        let mut w = CMatrix::identity(n, n);
        w.view_mut((k, k), (m, m)).copy_from(&u);
        let w_adj = w.adjoint();
        for a in work.iter_mut() {
            *a = &w_adj * &*a * &w;
        }
        p *= w;
    }

    let max_subdiagonal = work
        .iter()
        .zip(matrices)
        .map(|(t, a)| relative_lower(t, a))
        .fold(0.0, f64::max);
    if max_subdiagonal > SUBDIAGONAL_TOL {
        return Err(Error::NoCommonEigenvector {
            residual: max_subdiagonal,
        });
    }
    Ok(Triangularization {
        p,
        forms: work.into_iter().map(zero_lower).collect(),
        max_subdiagonal,
    })
}

/// A unit vector that is an eigenvector of every matrix in the family.
fn common_eigenvector(family: &[CMatrix]) -> Result<nalgebra::DVector<Complex64>> {
    let m = family[0].nrows();
    let mut basis = CMatrix::identity(m, m);
    for a in family {
        if basis.ncols() == 1 {
            break;
        }
        let restricted = basis.adjoint() * a * &basis;
        let null = eigenspace(&restricted)?;
        basis = &basis * null;
    }
    let v = basis.column(0).into_owned();
    let mut residual: f64 = 0.0;
    for a in family {
        let av = a * &v;
        let lambda = v.dotc(&av);
        let scale = linalg::frobenius(a).max(f64::MIN_POSITIVE);
        residual = residual.max((av - &v * lambda).norm() / scale);
    }
    if residual > SUBDIAGONAL_TOL {
        return Err(Error::NoCommonEigenvector { residual });
    }
    Ok(v)
}

/// Orthonormal basis of an eigenspace of `b`, as columns.
///
/// Eigenvalues computed for a defective eigenvalue scatter around the true
/// value; averaging the cluster recovers it to near machine precision.
fn eigenspace(b: &CMatrix) -> Result<CMatrix> {
    let s = b.nrows();
    let scale = linalg::frobenius(b).max(1.0);
    let (_, t) = linalg::schur(b)?;
    let values: Vec<Complex64> = t.diagonal().iter().copied().collect();
    let seed = values[0];
    let cluster: Vec<Complex64> = values
        .iter()
        .copied()
        .filter(|z| (z - seed).norm() <= 1e-4 * scale)
        .collect();
    let mean = cluster.iter().sum::<Complex64>() / cluster.len() as f64;

    for (shift, null_tol) in [(mean, 1e-9 * scale), (seed, 1e-7 * scale)] {
        let shifted = b - CMatrix::identity(s, s) * shift;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.as_ref().expect("requested V");
        let cols: Vec<usize> = (0..s)
            .filter(|&i| svd.singular_values[i] <= null_tol)
            .collect();
        if !cols.is_empty() {
            let mut out = CMatrix::zeros(s, cols.len());
            for (c, &i) in cols.iter().enumerate() {
                for r in 0..s {
                    out[(r, c)] = v_t[(i, r)].conj();
                }
            }
            return Ok(out);
        }
    }
    let shifted = b - CMatrix::identity(s, s) * mean;
    let smallest = shifted
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Err(Error::NoCommonEigenvector {
        residual: smallest / scale,
    })
}

/// A unitary matrix whose first column is `v` (unit norm).
fn complete_basis(v: &nalgebra::DVector<Complex64>) -> CMatrix {
    let m = v.len();
    let pivot = (0..m)
        .max_by(|&i, &j| v[i].norm().total_cmp(&v[j].norm()))
        .unwrap_or(0);
    let mut seed = CMatrix::zeros(m, m);
    seed.set_column(0, v);
    let mut col = 1;
    for i in 0..m {
        if i != pivot {
            seed[(i, col)] = linalg::ONE;
            col += 1;
        }
    }
    let mut q = seed.qr().q();
    // Householder QR may flip the phase of the first column; undo it.
    let phase = q.column(0).dotc(v);
    let phase = phase / phase.norm();
    let first = q.column(0) * phase;
    q.set_column(0, &first);
    q
}
