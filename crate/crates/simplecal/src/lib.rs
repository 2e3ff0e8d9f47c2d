//! Calibration and prediction schemes for linear-Gaussian inverse problems
//! solved with simplified models.
//!
//! A high-fidelity reference model (data matrix `G`, prediction matrix `Y`,
//! prior covariance `Σx`, noise covariances `Σεd`, `Σεp`) describes what the
//! modeller actually believes. A simplification matrix `C` embeds the
//! parameters of a cheaper model into the reference parameter space via
//! `x = Cv + Du`, where `D` spans the orthogonal complement of `range(C)`
//! and `u` carries the complexity the simple model cannot represent.
//!
//! On top of that decomposition the crate provides four calibration and
//! prediction schemes sharing one Gaussian predictive kernel:
//!
//! * [`schemes::run_optimal`] — the full-model benchmark posterior;
//! * [`schemes::run_naive`] — standard Bayesian calibration of the simple
//!   model with the rigorously propagated prior `Σv = C⁺ Σx C⁺ᵀ`;
//! * [`schemes::run_compensated`] — the naive machinery with the inflated
//!   prior `R Σx Rᵀ`, `R = Z̃⁺Z`, which reproduces the optimal posterior for
//!   highly parameterized models;
//! * [`schemes::run_data_driven`] — a filtered scheme that discards all
//!   prior information in the row space of the filtered data matrix and
//!   generalizes truncated-SVD inversion.
//!
//! The [`conservativeness`] module decides whether an approximate posterior
//! underestimates uncertainty relative to the benchmark, both in closed form
//! and by a seeded Monte Carlo oracle. The [`aquifer`] module builds a small
//! 1-D confined-aquifer example end to end, including a Metropolis sampler
//! for the nonlinear posterior.
//!
//! All numeric code is generic over the scalar type through [`Scalar`];
//! `f64` is the intended working precision and the concrete aliases below
//! ([`Matrix64`], [`Vector64`], ...) are what the CLI and most tests use.

pub mod aquifer;
pub mod conservativeness;
mod error;
pub mod gauss;
pub mod linalg;
pub mod model;
mod scalar;
pub mod schemes;

pub use error::Error;
pub use scalar::Scalar;

/// Dense column-major matrix over a generic scalar.
pub type Matrix<T> = nalgebra::DMatrix<T>;
/// Dense column vector over a generic scalar.
pub type Vector<T> = nalgebra::DVector<T>;

/// Double-precision matrix, the default working type.
pub type Matrix64 = Matrix<f64>;
/// Double-precision vector.
pub type Vector64 = Vector<f64>;
/// Single-precision matrix.
pub type Matrix32 = Matrix<f32>;
/// Single-precision vector.
pub type Vector32 = Vector<f32>;

/// Result alias for fallible operations in this crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Default numeric-rank tolerance, relative to the largest singular value.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Default tolerance for the optimal-simplification residual test,
/// relative to the norms of `G` and `Y`.
pub const DEFAULT_OPTIMALITY_TOL: f64 = 1e-8;
/// Default tolerance band for conservativeness verdicts, relative to the
/// spectral norm of the reference posterior covariance.
pub const DEFAULT_VERDICT_TOL: f64 = 1e-8;
/// Default tolerance for eigenvalue-based positive-semidefiniteness checks,
/// relative to the spectral norm of the matrix under test.
pub const DEFAULT_PSD_TOL: f64 = 1e-10;

pub(crate) fn real<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("finite f64 literal converts to any Scalar")
}
