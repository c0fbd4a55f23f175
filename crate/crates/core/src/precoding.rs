//! Effective channel, zero-forcing outer precoder and per-user SNR.
//!
//! The outer precoder zero-forces the overall channel `H_e Q` seen after the
//! decoding matrix and normalizes every column to unit power. With that
//! normalization the SNR of user `p` is `1 / (N0 [(Q^H A Q)^-1]_pp)` where
//! `A = H_e^H H_e`. Since `Q` is unitary the same value is
//! `1 / (N0 q_p^H A^-1 q_p)`; the quadratic form is what production code
//! evaluates, the matrix form is kept as an independent check.

use nalgebra::Cholesky;

use crate::channel::{ChannelMatrix, InnerPrecoder};
use crate::codebook::DecodingMatrix;
use crate::error::{invalid, Error, Result};
use crate::linalg::{gauss_jordan_inverse, hermitian_eigen, CMatrix, C64};

/// Gram matrices with a larger condition number are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// `D x P` channel seen through the inner precoder, `H_e = W^H H`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel(CMatrix);

impl EffectiveChannel {
    /// Wraps a `D x P` matrix; requires `D >= P >= 1`.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.ncols() == 0 || matrix.nrows() < matrix.ncols() {
            return Err(invalid(format!(
                "effective channel must be D x P with D >= P >= 1, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self(matrix))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn num_users(&self) -> usize {
        self.0.ncols()
    }

    /// `H_e^H H_e`.
    pub fn gram(&self) -> CMatrix {
        self.0.adjoint() * &self.0
    }
}

pub fn effective_channel(w: &InnerPrecoder, h: &ChannelMatrix) -> Result<EffectiveChannel> {
    if w.num_antennas() != h.num_antennas() {
        return Err(invalid(format!(
            "inner precoder has {} rows but channel has {} antennas",
            w.num_antennas(),
            h.num_antennas()
        )));
    }
    EffectiveChannel::new(w.matrix().adjoint() * h.matrix())
}

fn check_noise(n0: f64) -> Result<()> {
    if n0.is_finite() && n0 > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("noise power must be positive, got {n0}")))
    }
}

/// Ratio of extreme eigenvalues of a Hermitian positive definite matrix;
/// infinite when the smallest eigenvalue is not positive.
pub fn condition_number(a: &CMatrix) -> Result<f64> {
    let eig = hermitian_eigen(a)?;
    let max = eig.values[0];
    let min = *eig.values.last().expect("nonempty");
    Ok(if min > 0.0 { max / min } else { f64::INFINITY })
}

fn inverse_checked(a: &CMatrix) -> Result<CMatrix> {
    let condition = condition_number(a)?;
    if !(condition < CONDITION_LIMIT) {
        return Err(Error::IllConditioned {
            condition,
            limit: CONDITION_LIMIT,
        });
    }
    let chol = Cholesky::new(a.clone()).ok_or(Error::IllConditioned {
        condition,
        limit: CONDITION_LIMIT,
    })?;
    Ok(chol.inverse())
}

/// `(H_e^H H_e)^-1`, computed once per channel and reused for every
/// decoding vector.
#[derive(Debug, Clone)]
pub struct GramInverse {
    inverse: CMatrix,
    users: usize,
}

impl GramInverse {
    pub fn new(h_e: &EffectiveChannel) -> Result<Self> {
        Ok(Self {
            inverse: inverse_checked(&h_e.gram())?,
            users: h_e.num_users(),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.inverse
    }

    pub fn num_users(&self) -> usize {
        self.users
    }

    /// `q_p^H A^-1 q_p` for column `p` of `q`.
    pub fn quadratic(&self, q: &DecodingMatrix, p: usize) -> f64 {
        let col = q.matrix().column(p);
        let mut acc = 0.0;
        // Hermitian form written out to avoid allocating per call.
        for i in 0..self.users {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..self.users {
                row += self.inverse[(i, j)] * col[j];
            }
            acc += (col[i].conj() * row).re;
        }
        acc
    }

    /// `sum_p 1 / (q_p^H A^-1 q_p)`; the average SNR is this divided by
    /// `N0 P`.
    pub fn snr_sum_unit_noise(&self, q: &DecodingMatrix) -> f64 {
        (0..self.users).map(|p| 1.0 / self.quadratic(q, p)).sum()
    }

    pub fn per_user_snr(&self, q: &DecodingMatrix, n0: f64, p: usize) -> f64 {
        1.0 / (n0 * self.quadratic(q, p))
    }
}

fn check_users(h_e: &EffectiveChannel, q: &DecodingMatrix) -> Result<()> {
    if q.dim() != h_e.num_users() {
        return Err(invalid(format!(
            "decoding matrix is {}x{} but channel has {} users",
            q.dim(),
            q.dim(),
            h_e.num_users()
        )));
    }
    Ok(())
}

/// Zero-forcing outer precoder with unit-norm columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterPrecoder {
    matrix: CMatrix,
    gains: Vec<f64>,
}

impl OuterPrecoder {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Diagonal of `Q^H H_e^H V`, each `1 / sqrt([(Q^H A Q)^-1]_pp)`.
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }
}

/// `V = normalize_columns(H_e Q (Q^H H_e^H H_e Q)^-1)`.
pub fn zf_outer_precoder(h_e: &EffectiveChannel, q: &DecodingMatrix) -> Result<OuterPrecoder> {
    check_users(h_e, q)?;
    let overall = h_e.matrix() * q.matrix();
    let inv = inverse_checked(&(overall.adjoint() * &overall))?;
    let mut v = overall * &inv;
    let mut gains = Vec::with_capacity(v.ncols());
    for (p, mut col) in v.column_iter_mut().enumerate() {
        let norm = col.norm();
        col.unscale_mut(norm);
        // ||v0_p||^2 = [(Q^H A Q)^-1]_pp, so the realized gain is 1/||v0_p||.
        debug_assert!((norm * norm - inv[(p, p)].re).abs() <= 1e-6 * norm * norm);
        gains.push(1.0 / norm);
    }
    Ok(OuterPrecoder { matrix: v, gains })
}

/// SNR of user `p` (0-based) through the quadratic form.
pub fn per_user_snr(h_e: &EffectiveChannel, q: &DecodingMatrix, n0: f64, p: usize) -> Result<f64> {
    check_noise(n0)?;
    check_users(h_e, q)?;
    if p >= h_e.num_users() {
        return Err(invalid(format!("user index {p} out of range")));
    }
    Ok(GramInverse::new(h_e)?.per_user_snr(q, n0, p))
}

/// SNR of user `p` from the diagonal of `(Q^H A Q)^-1`, inverted by
/// Gauss-Jordan elimination. Slower than [`per_user_snr`]; used to check it.
pub fn per_user_snr_matrix_form(
    h_e: &EffectiveChannel,
    q: &DecodingMatrix,
    n0: f64,
    p: usize,
) -> Result<f64> {
    check_noise(n0)?;
    check_users(h_e, q)?;
    if p >= h_e.num_users() {
        return Err(invalid(format!("user index {p} out of range")));
    }
    let conj = q.matrix().adjoint() * h_e.gram() * q.matrix();
    let condition = condition_number(&conj)?;
    if !(condition < CONDITION_LIMIT) {
        return Err(Error::IllConditioned {
            condition,
            limit: CONDITION_LIMIT,
        });
    }
    let inv = gauss_jordan_inverse(&conj)?;
    Ok(1.0 / (n0 * inv[(p, p)].re))
}

/// Per-user SNRs of plain zero-forcing, i.e. decoding with `Q = I`.
pub fn noncooperative_baseline_snr(h_e: &EffectiveChannel, n0: f64) -> Result<Vec<f64>> {
    check_noise(n0)?;
    let gram_inv = GramInverse::new(h_e)?;
    Ok(baseline_from_inverse(&gram_inv, n0))
}

pub(crate) fn baseline_from_inverse(gram_inv: &GramInverse, n0: f64) -> Vec<f64> {
    (0..gram_inv.num_users())
        .map(|p| 1.0 / (n0 * gram_inv.matrix()[(p, p)].re))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian_matrix, hermitian_eigen};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn random_channel(d: usize, p: usize, seed: u64) -> EffectiveChannel {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        EffectiveChannel::new(complex_gaussian_matrix(&mut rng, d, p, 1.0)).unwrap()
    }

    fn random_unitary(p: usize, seed: u64) -> DecodingMatrix {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let g = complex_gaussian_matrix(&mut rng, p, p, 1.0);
        DecodingMatrix::new(hermitian_eigen(&(&g * g.adjoint())).unwrap().vectors).unwrap()
    }

    fn orthonormal_channel(d: usize, p: usize) -> EffectiveChannel {
        EffectiveChannel::new(CMatrix::identity(d, p)).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn effective_channel_dimension_checks() {
        assert!(EffectiveChannel::new(CMatrix::zeros(3, 4)).is_err());
        assert!(EffectiveChannel::new(CMatrix::zeros(3, 0)).is_err());
        assert!(EffectiveChannel::new(CMatrix::zeros(6, 4)).is_ok());
    }

    #[test]
    fn zf_on_orthonormal_channel_is_the_channel() {
        let h_e = orthonormal_channel(6, 4);
        let v = zf_outer_precoder(&h_e, &DecodingMatrix::identity(4)).unwrap();
        assert!((v.matrix() - h_e.matrix()).norm() < 1e-12);
        assert!(v.gains().iter().all(|g| (g - 1.0).abs() < 1e-12));
    }

    #[test]
    fn zf_scalar_case() {
        let h_e = random_channel(3, 1, 4);
        let q = DecodingMatrix::identity(1);
        let v = zf_outer_precoder(&h_e, &q).unwrap();
        let norm = h_e.matrix().norm();
        assert!((v.matrix() - h_e.matrix().unscale(norm)).norm() < 1e-12);
        assert!(rel(v.gains()[0], norm) < 1e-12);
    }

    #[test]
    fn zf_diagonalizes_the_overall_channel() {
        for seed in 0..20 {
            let h_e = random_channel(6, 4, seed);
            let q = random_unitary(4, 100 + seed);
            let v = zf_outer_precoder(&h_e, &q).unwrap();
            let eff = q.matrix().adjoint() * h_e.matrix().adjoint() * v.matrix();
            for i in 0..4 {
                for j in 0..4 {
                    if i == j {
                        assert!(eff[(i, i)].im.abs() < 1e-8);
                        assert!((eff[(i, i)].re - v.gains()[i]).abs() < 1e-8);
                    } else {
                        assert!(eff[(i, j)].norm() < 1e-8);
                    }
                }
                assert!((v.matrix().column(i).norm() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn snr_examples() {
        let h_e = random_channel(4, 1, 1);
        let snr = per_user_snr(&h_e, &DecodingMatrix::identity(1), 0.5, 0).unwrap();
        assert!(rel(snr, h_e.matrix().norm_squared() / 0.5) < 1e-12);

        // Orthogonal columns with norms g_p.
        let norms = [0.5, 1.0, 2.0];
        let mut m = CMatrix::zeros(5, 3);
        for (p, g) in norms.iter().enumerate() {
            m[(p, p)] = C64::new(*g, 0.0);
        }
        let h_e = EffectiveChannel::new(m).unwrap();
        for (p, g) in norms.iter().enumerate() {
            let snr = per_user_snr(&h_e, &DecodingMatrix::identity(3), 2.0, p).unwrap();
            assert!(rel(snr, g * g / 2.0) < 1e-12);
        }
    }

    #[test]
    fn eigenmatrix_decoder_gives_eigenvalue_snr() {
        let h_e = random_channel(6, 4, 9);
        let eig = hermitian_eigen(&h_e.gram()).unwrap();
        let u = DecodingMatrix::new(eig.vectors.clone()).unwrap();
        for p in 0..4 {
            let snr = per_user_snr(&h_e, &u, 0.3, p).unwrap();
            assert!(rel(snr, eig.values[p] / 0.3) < 1e-9);
        }
    }

    #[test]
    fn baseline_matches_identity_decoder() {
        let h_e = random_channel(6, 4, 2);
        let base = noncooperative_baseline_snr(&h_e, 0.7).unwrap();
        for (p, b) in base.iter().enumerate() {
            let snr = per_user_snr(&h_e, &DecodingMatrix::identity(4), 0.7, p).unwrap();
            assert!(rel(*b, snr) < 1e-14);
        }
        let base = noncooperative_baseline_snr(&orthonormal_channel(6, 4), 0.25).unwrap();
        assert!(base.iter().all(|s| rel(*s, 4.0) < 1e-12));
    }

    #[test]
    fn baseline_falls_with_correlation() {
        // Columns (1, 0) and (rho, sqrt(1 - rho^2)): [A^-1]_pp = 1 / (1 - rho^2).
        let mut last = f64::INFINITY;
        for rho in [0.0, 0.3, 0.6, 0.9, 0.99] {
            let mut m = CMatrix::zeros(2, 2);
            m[(0, 0)] = C64::new(1.0, 0.0);
            m[(0, 1)] = C64::new(rho, 0.0);
            m[(1, 1)] = C64::new((1.0 - rho * rho).sqrt(), 0.0);
            let snr = noncooperative_baseline_snr(&EffectiveChannel::new(m).unwrap(), 1.0).unwrap();
            assert!(rel(snr[0], 1.0 - rho * rho) < 1e-9);
            assert!(snr[0] <= last);
            last = snr[0];
        }
    }

    #[test]
    fn quadratic_and_matrix_forms_agree() {
        for seed in 0..50 {
            let h_e = random_channel(6, 4, seed);
            let q = random_unitary(4, 1000 + seed);
            for p in 0..4 {
                let a = per_user_snr(&h_e, &q, 1.3, p).unwrap();
                let b = per_user_snr_matrix_form(&h_e, &q, 1.3, p).unwrap();
                assert!(rel(a, b) < 1e-8, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn singular_gram_is_reported() {
        let mut m = CMatrix::zeros(4, 2);
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(0, 1)] = C64::new(1.0, 0.0);
        let h_e = EffectiveChannel::new(m).unwrap();
        let err = noncooperative_baseline_snr(&h_e, 1.0).unwrap_err();
        assert!(matches!(err, Error::IllConditioned { .. }));
        assert!(zf_outer_precoder(&h_e, &DecodingMatrix::identity(2)).is_err());
    }

    #[test]
    fn bad_noise_and_index() {
        let h_e = random_channel(4, 2, 0);
        let q = DecodingMatrix::identity(2);
        assert!(per_user_snr(&h_e, &q, 0.0, 0).is_err());
        assert!(per_user_snr(&h_e, &q, 1.0, 2).is_err());
        assert!(per_user_snr(&h_e, &DecodingMatrix::identity(3), 1.0, 0).is_err());
    }
}
