//! Closed-form analysis of codebook-based cooperation.
//!
//! With `A = H_e^H H_e = U diag(lambda) U^H`, the denominator of user `p`'s
//! SNR is `sum_i |q_p^H u_i|^2 / lambda_i`. Bounding the off-diagonal angles
//! by `sin^2 theta_pp`, applying Jensen's inequality and approximating the
//! quantization-cell distortion by `2^(-b/(P-1))` yields a lower bound on the
//! expected average SNR. Letting `b` grow recovers the ideal-cooperation SNR
//! `(1/(N0 P)) sum_p lambda_p`.

use nalgebra::DMatrix;

use crate::codebook::DecodingMatrix;
use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::precoding::EffectiveChannel;

/// Eigenvalues (descending) and eigenmatrix of `H_e^H H_e`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    eigenvalues: Vec<f64>,
    eigenmatrix: CMatrix,
}

impl EigenSpectrum {
    /// Spectrum from explicit eigenvalues with an identity eigenmatrix; the
    /// values are sorted descending.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() || eigenvalues.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(invalid(
                "eigenvalues must be nonempty, finite and nonnegative",
            ));
        }
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let n = eigenvalues.len();
        Ok(Self {
            eigenvalues,
            eigenmatrix: CMatrix::identity(n, n),
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenmatrix(&self) -> &CMatrix {
        &self.eigenmatrix
    }

    pub fn num_users(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `sum_p 1 / lambda_p`, which equals `trace(A^-1)`.
    pub fn trace_inverse(&self) -> f64 {
        self.eigenvalues.iter().map(|l| 1.0 / l).sum()
    }

    /// `U Lambda U^H`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut scaled = self.eigenmatrix.clone();
        for (j, lambda) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*lambda);
        }
        scaled * self.eigenmatrix.adjoint()
    }

    /// The eigenmatrix as a decoding matrix.
    pub fn decoding_matrix(&self) -> Result<DecodingMatrix> {
        DecodingMatrix::new(self.eigenmatrix.clone())
    }
}

pub fn eigen_spectrum(h_e: &EffectiveChannel) -> Result<EigenSpectrum> {
    let eig = hermitian_eigen(&h_e.gram())?;
    Ok(EigenSpectrum {
        // Rounding can leave a tiny negative value on a rank-deficient Gram.
        eigenvalues: eig.values.into_iter().map(|l| l.max(0.0)).collect(),
        eigenmatrix: eig.vectors,
    })
}

/// Approximate mean quantization-cell distortion `E{sin^2 theta} ~ 2^(-b/(P-1))`.
pub fn expected_cell_distortion(bits: u32, users: usize) -> Result<f64> {
    if users < 2 {
        return Err(invalid("cell distortion needs at least two users"));
    }
    Ok((-(bits as f64) / (users - 1) as f64).exp2())
}

/// Per-user bound terms at unit noise power,
/// `1 / (1/lambda_p + (trace(A^-1) - 2/lambda_p) * distortion)`.
pub fn lower_bound_terms(spectrum: &EigenSpectrum, distortion: f64) -> Result<Vec<f64>> {
    if !(distortion.is_finite() && distortion >= 0.0) {
        return Err(invalid(format!(
            "distortion must be nonnegative, got {distortion}"
        )));
    }
    if spectrum.eigenvalues.iter().any(|l| *l <= 0.0) {
        return Err(invalid("lower bound needs strictly positive eigenvalues"));
    }
    let trace_inv = spectrum.trace_inverse();
    spectrum
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(user, lambda)| {
            let inv = 1.0 / lambda;
            let denominator = inv + (trace_inv - 2.0 * inv) * distortion;
            if denominator > 0.0 {
                Ok(1.0 / denominator)
            } else {
                Err(Error::BoundInvalid { user, denominator })
            }
        })
        .collect()
}

/// Jensen lower bound on the expected average SNR for a `bits`-bit random
/// codebook.
pub fn snr_lower_bound(spectrum: &EigenSpectrum, bits: u32, n0: f64) -> Result<f64> {
    check_noise(n0)?;
    let distortion = expected_cell_distortion(bits, spectrum.num_users())?;
    let terms = lower_bound_terms(spectrum, distortion)?;
    Ok(terms.iter().sum::<f64>() / (n0 * spectrum.num_users() as f64))
}

/// Average SNR under ideal cooperation, `(1/(N0 P)) sum_p lambda_p`.
pub fn ideal_cooperation_snr(spectrum: &EigenSpectrum, n0: f64) -> Result<f64> {
    check_noise(n0)?;
    Ok(spectrum.eigenvalues.iter().sum::<f64>() / (n0 * spectrum.num_users() as f64))
}

fn check_noise(n0: f64) -> Result<()> {
    if n0.is_finite() && n0 > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("noise power must be positive, got {n0}")))
    }
}

/// `cos^2 theta_{p,i} = |q_p^H u_i|^2`, indexed `[(p, i)]`.
pub fn alignment(q: &DecodingMatrix, eigenmatrix: &CMatrix) -> DMatrix<f64> {
    (q.matrix().adjoint() * eigenmatrix).map(|z| z.norm_sqr())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                extend(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Quantization-cell distortion of `q` against the eigenbasis: for every
/// eigenvector `u_i`, `sin^2` of the angle to the decoding vector paired with
/// it.
///
/// The average-SNR objective is invariant to reordering the columns of `q`,
/// so columns are paired with eigenvectors by the permutation maximizing the
/// total alignment before the angles are measured. Exhaustive over `P!`
/// permutations; intended for small user counts.
pub fn matched_distortion(q: &DecodingMatrix, eigenmatrix: &CMatrix) -> Vec<f64> {
    let cos2 = alignment(q, eigenmatrix);
    let n = q.dim();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in permutations(n) {
        // perm[i] is the column of q paired with eigenvector i.
        let total: f64 = perm.iter().enumerate().map(|(i, &p)| cos2[(p, i)]).sum();
        if best.as_ref().is_none_or(|(t, _)| total > *t) {
            best = Some((total, perm));
        }
    }
    let (_, perm) = best.expect("at least one permutation");
    perm.iter()
        .enumerate()
        .map(|(i, &p)| (1.0 - cos2[(p, i)]).max(0.0))
        .collect()
}
