//! Physical channel model for a half-wavelength uniform linear array.
//!
//! All users see the same set of scattering paths, each with independent
//! complex gains, so they share one spatial covariance matrix. The inner
//! precoder is built from that covariance.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use crate::error::{invalid, Result};
use crate::linalg::{
    complex_gaussian_matrix, hermitian_defect, hermitian_eigen, CMatrix, CVector, C64,
};

/// Maximum entrywise asymmetry accepted for a covariance matrix.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues below `-PSD_RTOL * trace` reject a covariance as indefinite.
pub const PSD_RTOL: f64 = 1e-10;

/// Array response of an `m`-element half-wavelength ULA toward `theta`.
///
/// Entry `k` is `exp(j * pi * sin(theta) * k)`.
pub fn steering_vector(theta: f64, m: usize) -> Result<CVector> {
    if !theta.is_finite() {
        return Err(invalid(format!(
            "steering angle must be finite, got {theta}"
        )));
    }
    if m == 0 {
        return Err(invalid("steering vector needs at least one antenna"));
    }
    let phase = PI * theta.sin();
    Ok(CVector::from_iterator(
        m,
        (0..m).map(|k| C64::from_polar(1.0, phase * k as f64)),
    ))
}

/// Path angles shared by every co-located user, plus the per-path gain
/// variance.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringEnvironment {
    num_antennas: usize,
    path_angles: Vec<f64>,
    path_gain_variance: f64,
}

impl ScatteringEnvironment {
    /// Builds an environment from explicit angles in `[-pi/2, pi/2)`.
    pub fn new(num_antennas: usize, path_angles: Vec<f64>) -> Result<Self> {
        if num_antennas == 0 {
            return Err(invalid("environment needs at least one antenna"));
        }
        if path_angles.is_empty() {
            return Err(invalid("environment needs at least one path"));
        }
        if let Some(bad) = path_angles
            .iter()
            .find(|t| !(t.is_finite() && **t >= -FRAC_PI_2 && **t < FRAC_PI_2))
        {
            return Err(invalid(format!("path angle {bad} outside [-pi/2, pi/2)")));
        }
        let path_gain_variance = 1.0 / path_angles.len() as f64;
        Ok(Self {
            num_antennas,
            path_angles,
            path_gain_variance,
        })
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn num_paths(&self) -> usize {
        self.path_angles.len()
    }

    pub fn path_angles(&self) -> &[f64] {
        &self.path_angles
    }

    /// `E|alpha|^2` for every path, equal to `1 / L`.
    pub fn path_gain_variance(&self) -> f64 {
        self.path_gain_variance
    }

    /// `M x L` matrix whose columns are the steering vectors of the paths, in
    /// the given angle order.
    fn steering_matrix(&self, angles: &[f64]) -> CMatrix {
        let mut s = CMatrix::zeros(self.num_antennas, angles.len());
        for (l, &theta) in angles.iter().enumerate() {
            // Angles were validated on construction.
            let v = steering_vector(theta, self.num_antennas).expect("validated angle");
            s.set_column(l, &v);
        }
        s
    }
}

/// Draws `num_paths` angles i.i.d. uniform over
/// `[center - spread/2, center + spread/2)`, clipped to `[-pi/2, pi/2)`.
pub fn draw_environment<R: Rng + ?Sized>(
    num_antennas: usize,
    num_paths: usize,
    sector_center: f64,
    sector_spread: f64,
    rng: &mut R,
) -> Result<ScatteringEnvironment> {
    if num_paths == 0 {
        return Err(invalid("environment needs at least one path"));
    }
    if !(sector_spread.is_finite() && sector_spread > 0.0) {
        return Err(invalid(format!(
            "sector spread must be positive and finite, got {sector_spread}"
        )));
    }
    if !(sector_center.is_finite() && (-FRAC_PI_2..FRAC_PI_2).contains(&sector_center)) {
        return Err(invalid(format!(
            "sector center {sector_center} outside [-pi/2, pi/2)"
        )));
    }
    let lo = sector_center - sector_spread / 2.0;
    let upper = FRAC_PI_2.next_down();
    let angles = (0..num_paths)
        .map(|_| {
            let u: f64 = rng.random();
            (lo + sector_spread * u).clamp(-FRAC_PI_2, upper)
        })
        .collect();
    ScatteringEnvironment::new(num_antennas, angles)
}

/// `M x P` downlink channel; column `p` is user `p`'s channel vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix(CMatrix);

impl ChannelMatrix {
    pub fn new(matrix: CMatrix) -> Self {
        Self(matrix)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn num_antennas(&self) -> usize {
        self.0.nrows()
    }

    pub fn num_users(&self) -> usize {
        self.0.ncols()
    }

    /// Channel restricted to the first `users` columns.
    pub fn first_users(&self, users: usize) -> Result<Self> {
        if users == 0 || users > self.num_users() {
            return Err(invalid(format!(
                "cannot take {users} users from a {}-user channel",
                self.num_users()
            )));
        }
        Ok(Self(self.0.columns(0, users).into_owned()))
    }
}

/// Draws `h_p = sum_l alpha_{l,p} s(theta_l)` for `num_users` users with
/// independent `CN(0, 1/L)` path gains.
pub fn sample_channel<R: Rng + ?Sized>(
    env: &ScatteringEnvironment,
    num_users: usize,
    rng: &mut R,
) -> Result<ChannelMatrix> {
    if num_users == 0 {
        return Err(invalid("channel needs at least one user"));
    }
    let steering = env.steering_matrix(&env.path_angles);
    let gains = complex_gaussian_matrix(rng, env.num_paths(), num_users, env.path_gain_variance);
    Ok(ChannelMatrix(steering * gains))
}

/// Hermitian positive semi-definite `M x M` spatial covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialCovariance(CMatrix);

impl SpatialCovariance {
    /// Wraps a square matrix. Hermitian and PSD checks are deferred to
    /// [`inner_precoder`].
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(invalid(format!(
                "covariance must be square and nonempty, got {}x{}",
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

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }
}

/// Closed-form covariance `R = (1/L) sum_l s(theta_l) s(theta_l)^H`.
///
/// The paths are summed in sorted angle order, so the result is bitwise
/// independent of the order the angles are stored in.
pub fn analytic_covariance(env: &ScatteringEnvironment) -> SpatialCovariance {
    let mut angles = env.path_angles.clone();
    angles.sort_by(f64::total_cmp);
    let s = env.steering_matrix(&angles);
    let r = (&s * s.adjoint()).map(|z| z * env.path_gain_variance);
    SpatialCovariance(r)
}

/// `M x D` matrix of the dominant covariance eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerPrecoder {
    matrix: CMatrix,
    eigenvalues: Vec<f64>,
    captured_energy: f64,
}

impl InnerPrecoder {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn num_antennas(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    /// Sum of the `D` largest covariance eigenvalues.
    pub fn captured_energy(&self) -> f64 {
        self.captured_energy
    }

    /// All covariance eigenvalues, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
}

/// Selects the eigenvectors of `cov` belonging to its `dim` largest
/// eigenvalues.
pub fn inner_precoder(cov: &SpatialCovariance, dim: usize) -> Result<InnerPrecoder> {
    let m = cov.dim();
    if dim == 0 || dim > m {
        return Err(invalid(format!(
            "inner precoder dimension {dim} must be in 1..={m}"
        )));
    }
    let defect = hermitian_defect(&cov.0);
    if defect > HERMITIAN_TOL {
        return Err(invalid(format!(
            "covariance is not Hermitian (max asymmetry {defect:e})"
        )));
    }
    let eig = hermitian_eigen(&cov.0)?;
    let trace = cov.trace();
    let smallest = *eig.values.last().expect("nonempty");
    if smallest < -PSD_RTOL * trace.abs() {
        return Err(invalid(format!(
            "covariance is not positive semi-definite (eigenvalue {smallest:e})"
        )));
    }
    Ok(InnerPrecoder {
        matrix: eig.vectors.columns(0, dim).into_owned(),
        captured_energy: eig.values[..dim].iter().sum(),
        eigenvalues: eig.values,
    })
}
