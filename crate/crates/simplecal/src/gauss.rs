//! Gaussian beliefs and exact linear-Gaussian conditioning.

use crate::linalg::{check_psd, default_psd_tol, ensure_finite, invert_innovation, symmetrize};
use crate::{real, Error, Matrix, Result, Scalar, Vector, DEFAULT_RANK_TOL};

/// A multivariate Gaussian with explicit mean and covariance. The covariance
/// is validated to be symmetric PSD within tolerance at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBelief<T: Scalar> {
    mean: Vector<T>,
    covariance: Matrix<T>,
}

impl<T: Scalar> GaussianBelief<T> {
    pub fn new(mean: Vector<T>, covariance: Matrix<T>) -> Result<Self> {
        if mean.len() != covariance.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "mean has {} entries but covariance is {}x{}",
                mean.len(),
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix {
                name: "mean",
                reason: "contains non-finite entries".into(),
            });
        }
        check_psd("covariance", &covariance, default_psd_tol())?;
        Ok(Self {
            mean,
            covariance: symmetrize(&covariance),
        })
    }

    /// Zero-mean belief, the increments convention used by the schemes.
    pub fn zero_mean(covariance: Matrix<T>) -> Result<Self> {
        let n = covariance.nrows();
        Self::new(Vector::zeros(n), covariance)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &Vector<T> {
        &self.mean
    }

    pub fn covariance(&self) -> &Matrix<T> {
        &self.covariance
    }

    /// Condition on a linear observation `d = H x + e`, `e ~ N(0, obs_noise_cov)`.
    ///
    /// Returns the posterior belief over `x`. The innovation matrix
    /// `H Σ Hᵀ + Σe` is inverted by Cholesky with a pseudoinverse fallback;
    /// a genuinely singular innovation is an error.
    pub fn condition_on(
        &self,
        obs_matrix: &Matrix<T>,
        obs_noise_cov: &Matrix<T>,
        data: &Vector<T>,
    ) -> Result<Self> {
        ensure_finite("obs_matrix", obs_matrix)?;
        check_psd("obs_noise_cov", obs_noise_cov, default_psd_tol())?;
        let n = self.dim();
        let m = obs_matrix.nrows();
        if obs_matrix.ncols() != n || obs_noise_cov.nrows() != m || data.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "observation of {} states with {}x{} matrix, {}x{} noise, {} data",
                n,
                obs_matrix.nrows(),
                obs_matrix.ncols(),
                obs_noise_cov.nrows(),
                obs_noise_cov.ncols(),
                data.len()
            )));
        }
        let sigma_ht = &self.covariance * obs_matrix.transpose();
        let innovation = obs_matrix * &sigma_ht + obs_noise_cov;
        let innovation_inv = invert_innovation(&innovation, real(DEFAULT_RANK_TOL))?;
        let gain = &sigma_ht * innovation_inv;
        let residual = data - obs_matrix * &self.mean;
        let mean = &self.mean + &gain * residual;
        let covariance = symmetrize(&(&self.covariance - gain * sigma_ht.transpose()));
        Self::new(mean, covariance)
    }
}
