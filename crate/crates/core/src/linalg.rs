//! Complex dense linear algebra helpers.
//!
//! Matrices are `nalgebra::DMatrix<Complex<f64>>`. The Hermitian eigensolver
//! wraps nalgebra's and adds the ordering and phase conventions the rest of
//! the crate relies on: eigenvalues descending, eigenvectors with their
//! largest-magnitude entry real and positive, near-ties broken by comparing
//! the canonicalized eigenvectors lexicographically.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative gap below which two eigenvalues are considered tied.
pub const EIGEN_TIE_RTOL: f64 = 1e-9;

/// Draws a circularly-symmetric complex Gaussian sample with `E|z|^2 = variance`.
///
/// Real and imaginary parts are independent normals with variance
/// `variance / 2` each.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(scale * re, scale * im)
}

/// Matrix of i.i.d. complex Gaussian entries, filled column by column.
pub fn complex_gaussian_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_gaussian(rng, variance);
        }
    }
    m
}

/// Largest entrywise deviation from Hermitian symmetry, `max |a_ij - conj(a_ji)|`.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let n = a.nrows().min(a.ncols());
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Frobenius norm of `W^H W - I`.
pub fn orthonormality_defect(w: &CMatrix) -> f64 {
    let gram = w.adjoint() * w;
    (gram - CMatrix::identity(w.ncols(), w.ncols())).norm()
}

/// Rotates `v` by a global phase so its largest-magnitude entry is real and
/// positive. The first entry within a relative 1e-12 of the maximum magnitude
/// is used as the reference, which keeps the choice stable under rounding.
/// Returns the index of that entry.
pub fn canonicalize_phase(v: &mut CVector) -> usize {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-12))
        .unwrap_or(0);
    let phase = v[pivot] / v[pivot].norm();
    let rot = phase.conj();
    for z in v.iter_mut() {
        *z *= rot;
    }
    // Remove the rounding residue on the reference entry.
    v[pivot] = C64::new(v[pivot].norm(), 0.0);
    pivot
}

fn lexicographic(a: &CVector, b: &CVector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// Eigen-decomposition of a Hermitian matrix in canonical form.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `U diag(values) U^H`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let lambda = self.values[j];
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= lambda);
        }
        scaled * self.vectors.adjoint()
    }
}

/// Eigen-decomposes a Hermitian matrix. Only the lower triangle is read, so
/// callers that care about asymmetric input must check it beforehand (see
/// [`hermitian_defect`]).
pub fn hermitian_eigen(a: &CMatrix) -> Result<HermitianEigen> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidArgument(format!(
            "eigen-decomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    let eig = SymmetricEigen::try_new(a.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;

    let mut pairs: Vec<(f64, CVector)> = (0..n)
        .map(|j| {
            let mut v: CVector = eig.eigenvectors.column(j).into_owned();
            let pivot = canonicalize_phase(&mut v);
            // Re-derive the real reference entry from the others so the
            // vector has unit norm to rounding (a 1x1 eigenvector is exactly 1).
            let rest: f64 = v
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != pivot)
                .map(|(_, z)| z.norm_sqr())
                .sum();
            v[pivot] = C64::new((1.0 - rest).max(0.0).sqrt(), 0.0);
            (eig.eigenvalues[j], v)
        })
        .collect();
    if pairs.iter().any(|(l, _)| !l.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }

    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let scale = pairs.iter().map(|(l, _)| l.abs()).fold(0.0, f64::max);
    let tol = EIGEN_TIE_RTOL * scale.max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (pairs[end - 1].0 - pairs[end].0) <= tol {
            end += 1;
        }
        if end - start > 1 {
            pairs[start..end].sort_by(|x, y| lexicographic(&x.1, &y.1));
        }
        start = end;
    }

    let mut vectors = CMatrix::zeros(n, n);
    for (j, (_, v)) in pairs.iter().enumerate() {
        vectors.set_column(j, v);
    }
    Ok(HermitianEigen {
        values: pairs.into_iter().map(|(l, _)| l).collect(),
        vectors,
    })
}

/// Inverts a square complex matrix by Gauss-Jordan elimination with partial
/// pivoting.
///
/// Deliberately independent of the Cholesky path used in production so the
/// two SNR formulas can be checked against each other.
pub fn gauss_jordan_inverse(a: &CMatrix) -> Result<CMatrix> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidArgument(
            "inverse of a non-square matrix".into(),
        ));
    }
    let n = a.nrows();
    let mut work = a.clone();
    let mut inv = CMatrix::identity(n, n);
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| work[(i, col)].norm().total_cmp(&work[(j, col)].norm()))
            .unwrap_or(col);
        if work[(pivot, col)].norm() <= scale * 1e-20 {
            return Err(Error::Numerical(
                "singular matrix in Gauss-Jordan inverse".into(),
            ));
        }
        work.swap_rows(col, pivot);
        inv.swap_rows(col, pivot);
        let p = work[(col, col)];
        for j in 0..n {
            work[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = work[(i, col)];
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                let w = work[(col, j)];
                let v = inv[(col, j)];
                work[(i, j)] -= f * w;
                inv[(i, j)] -= f * v;
            }
        }
    }
    Ok(inv)
}

/// Quadratic form `x^H A x`, real part only (A assumed Hermitian).
pub fn hermitian_form(a: &CMatrix, x: &CVector) -> f64 {
    (x.adjoint() * a * x)[(0, 0)].re
}
