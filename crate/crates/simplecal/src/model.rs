//! The high-fidelity reference model, simplification matrices, the
//! `x = Cv + Du` decomposition, optimal-simplification construction and
//! auditing, and rigorous prior propagation onto the simple parameters.

use crate::linalg::{
    check_psd, cokernel_basis, default_psd_tol, ensure_finite, invert_innovation, svd, symmetrize,
    vstack,
};
use crate::{real, Error, Matrix, Result, Scalar, DEFAULT_RANK_TOL};

/// Reference-model quintuple: data matrix `G` (D_d x D_x), prediction matrix
/// `Y` (D_p x D_x), prior covariance `Σx`, data-noise covariance `Σεd`, and
/// prediction-noise covariance `Σεp`. The prior mean is implicitly zero
/// (work in increments).
#[derive(Debug, Clone)]
pub struct HighFidelityModel<T: Scalar> {
    g: Matrix<T>,
    y: Matrix<T>,
    sigma_x: Matrix<T>,
    sigma_ed: Matrix<T>,
    sigma_ep: Matrix<T>,
}

impl<T: Scalar> HighFidelityModel<T> {
    pub fn new(
        g: Matrix<T>,
        y: Matrix<T>,
        sigma_x: Matrix<T>,
        sigma_ed: Matrix<T>,
        sigma_ep: Matrix<T>,
    ) -> Result<Self> {
        ensure_finite("g", &g)?;
        ensure_finite("y", &y)?;
        check_psd("sigma_x", &sigma_x, default_psd_tol())?;
        check_psd("sigma_ed", &sigma_ed, default_psd_tol())?;
        check_psd("sigma_ep", &sigma_ep, default_psd_tol())?;
        let dx = g.ncols();
        if y.ncols() != dx
            || sigma_x.nrows() != dx
            || sigma_ed.nrows() != g.nrows()
            || sigma_ep.nrows() != y.nrows()
        {
            return Err(Error::DimensionMismatch(format!(
                "g {}x{}, y {}x{}, sigma_x {}x{}, sigma_ed {}x{}, sigma_ep {}x{}",
                g.nrows(),
                g.ncols(),
                y.nrows(),
                y.ncols(),
                sigma_x.nrows(),
                sigma_x.ncols(),
                sigma_ed.nrows(),
                sigma_ed.ncols(),
                sigma_ep.nrows(),
                sigma_ep.ncols()
            )));
        }
        Ok(Self {
            g,
            y,
            sigma_x: symmetrize(&sigma_x),
            sigma_ed: symmetrize(&sigma_ed),
            sigma_ep: symmetrize(&sigma_ep),
        })
    }

    pub fn g(&self) -> &Matrix<T> {
        &self.g
    }

    pub fn y(&self) -> &Matrix<T> {
        &self.y
    }

    pub fn sigma_x(&self) -> &Matrix<T> {
        &self.sigma_x
    }

    pub fn sigma_ed(&self) -> &Matrix<T> {
        &self.sigma_ed
    }

    pub fn sigma_ep(&self) -> &Matrix<T> {
        &self.sigma_ep
    }

    pub fn dim_x(&self) -> usize {
        self.g.ncols()
    }

    pub fn dim_d(&self) -> usize {
        self.g.nrows()
    }

    pub fn dim_p(&self) -> usize {
        self.y.nrows()
    }

    /// The stacked map `Z = [G; Y]` from parameters to (data, prediction).
    pub fn stacked_z(&self) -> Matrix<T> {
        vstack(&self.g, &self.y)
    }
}

/// A simplification `x' = C v'` with cached factors: the cokernel basis `D`
/// (orthonormal, `DᵀC = 0`), the simplified matrices `G̃ = GC` and
/// `Ỹ = YC`, and the pseudoinverse `C⁺`.
#[derive(Debug, Clone)]
pub struct Simplification<T: Scalar> {
    c: Matrix<T>,
    d_basis: Matrix<T>,
    g_tilde: Matrix<T>,
    y_tilde: Matrix<T>,
    c_pinv: Matrix<T>,
}

impl<T: Scalar> Simplification<T> {
    /// Build a simplification from a full-column-rank matrix `c`
    /// (D_x x D_v). A square full-rank `c` yields an empty (zero-column)
    /// cokernel basis and all formulas degrade gracefully.
    pub fn new(model: &HighFidelityModel<T>, c: Matrix<T>) -> Result<Self> {
        if c.nrows() != model.dim_x() {
            return Err(Error::DimensionMismatch(format!(
                "simplification has {} rows but the model has {} parameters",
                c.nrows(),
                model.dim_x()
            )));
        }
        let rank_tol = real(DEFAULT_RANK_TOL);
        let factors = svd(&c, rank_tol)?;
        if factors.numeric_rank < c.ncols() {
            return Err(Error::RankDeficientSimplification {
                rows: c.nrows(),
                cols: c.ncols(),
                rank: factors.numeric_rank,
            });
        }
        let d_basis = cokernel_basis(&c, rank_tol)?;
        let g_tilde = model.g() * &c;
        let y_tilde = model.y() * &c;
        let c_pinv = factors.pseudoinverse();
        Ok(Self {
            c,
            d_basis,
            g_tilde,
            y_tilde,
            c_pinv,
        })
    }

    /// Construct an optimal simplification `C* = V_r` from the SVD of
    /// `Z = [G; Y]`: the unmodelled directions then touch neither the data
    /// nor the prediction, by construction.
    pub fn optimal(model: &HighFidelityModel<T>) -> Result<Self> {
        let z = model.stacked_z();
        let factors = svd(&z, real(DEFAULT_RANK_TOL))?;
        let c_star = factors
            .vt
            .rows(0, factors.numeric_rank)
            .transpose()
            .into_owned();
        Self::new(model, c_star)
    }

    pub fn c(&self) -> &Matrix<T> {
        &self.c
    }

    /// Orthonormal basis for the cokernel of `C`; zero columns when `C` is
    /// square full-rank.
    pub fn d_basis(&self) -> &Matrix<T> {
        &self.d_basis
    }

    pub fn g_tilde(&self) -> &Matrix<T> {
        &self.g_tilde
    }

    pub fn y_tilde(&self) -> &Matrix<T> {
        &self.y_tilde
    }

    pub fn c_pinv(&self) -> &Matrix<T> {
        &self.c_pinv
    }

    pub fn dim_v(&self) -> usize {
        self.c.ncols()
    }

    /// `Z̃ = ZC = [G̃; Ỹ]`.
    pub fn stacked_z_tilde(&self) -> Matrix<T> {
        vstack(&self.g_tilde, &self.y_tilde)
    }

    /// Test whether the simplification is optimal: both `GD` and `YD`
    /// vanish relative to `tol`. Residuals are reported either way.
    pub fn check_optimality(&self, model: &HighFidelityModel<T>, tol: T) -> OptimalityCheck<T> {
        let gd = model.g() * &self.d_basis;
        let yd = model.y() * &self.d_basis;
        let g_norm = model.g().norm().max(T::default_epsilon());
        let y_norm = model.y().norm().max(T::default_epsilon());
        let data_residual = gd.norm() / g_norm;
        let pred_residual = yd.norm() / y_norm;
        OptimalityCheck {
            is_optimal: data_residual <= tol && pred_residual <= tol,
            data_residual,
            pred_residual,
        }
    }
}

/// Result of the optimal-simplification test: relative Frobenius residuals
/// of `GD` and `YD`.
#[derive(Debug, Clone, Copy)]
pub struct OptimalityCheck<T: Scalar> {
    pub is_optimal: bool,
    pub data_residual: T,
    pub pred_residual: T,
}

/// How the unmodelled complexity `u` enters the problem: `η = (GD)u` is the
/// structural data error, `ε = (YD)u` the structural prediction error, and
/// `Σu`, `Σvu` are the propagated second moments of `(v, u)`.
#[derive(Debug, Clone)]
pub struct ErrorDecomposition<T: Scalar> {
    pub eta_matrix: Matrix<T>,
    pub eps_matrix: Matrix<T>,
    pub sigma_u: Matrix<T>,
    pub sigma_vu: Matrix<T>,
}

impl<T: Scalar> ErrorDecomposition<T> {
    /// Whether `v` and `u` are uncorrelated under the prior:
    /// `||Σvu||_F <= tol * sqrt(||Σv|| ||Σu||)`.
    pub fn uv_independent(&self, sigma_v: &Matrix<T>, tol: T) -> bool {
        let scale = (sigma_v.norm() * self.sigma_u.norm()).sqrt();
        self.sigma_vu.norm() <= tol * scale.max(T::default_epsilon())
    }
}

/// Propagate the reference prior onto the simple parameters:
/// `Σv = C⁺ Σx C⁺ᵀ`, `Σu = Dᵀ Σx D`, `Σvu = C⁺ Σx D`.
pub fn propagate_prior<T: Scalar>(
    model: &HighFidelityModel<T>,
    simp: &Simplification<T>,
) -> (Matrix<T>, ErrorDecomposition<T>) {
    let c_pinv = simp.c_pinv();
    let d = simp.d_basis();
    let sigma_v = symmetrize(&(c_pinv * model.sigma_x() * c_pinv.transpose()));
    let sigma_u = symmetrize(&(d.transpose() * model.sigma_x() * d));
    let sigma_vu = c_pinv * model.sigma_x() * d;
    let errs = ErrorDecomposition {
        eta_matrix: model.g() * d,
        eps_matrix: model.y() * d,
        sigma_u,
        sigma_vu,
    };
    (sigma_v, errs)
}

/// Residual of the balanced-error condition `YD = Ỹ Eⁿ GD`, where `Eⁿ` is
/// the naive estimator built from `sigma_v`. A zero residual is the
/// knife-edge under which the naive scheme stays conservative despite a
/// suboptimal simplification.
pub fn balanced_error_residual<T: Scalar>(
    model: &HighFidelityModel<T>,
    simp: &Simplification<T>,
    sigma_v: &Matrix<T>,
) -> Result<Matrix<T>> {
    let g_tilde = simp.g_tilde();
    let innovation = g_tilde * sigma_v * g_tilde.transpose() + model.sigma_ed();
    let innovation_inv = invert_innovation(&innovation, real(DEFAULT_RANK_TOL))?;
    let estimator = sigma_v * g_tilde.transpose() * innovation_inv;
    let d = simp.d_basis();
    let yd = model.y() * d;
    let gd = model.g() * d;
    Ok(yd - simp.y_tilde() * estimator * gd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eigenvalues;
    use crate::{Matrix64, DEFAULT_OPTIMALITY_TOL};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix64 {
        Matrix64::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Matrix64 {
        let a = random_matrix(rng, n, n);
        &a * a.transpose() + Matrix64::identity(n, n) * 0.1
    }

    fn small_model(rng: &mut ChaCha8Rng, dx: usize, dd: usize, dp: usize) -> HighFidelityModel<f64> {
        HighFidelityModel::new(
            random_matrix(rng, dd, dx),
            random_matrix(rng, dp, dx),
            random_spd(rng, dx),
            random_spd(rng, dd),
            random_spd(rng, dp),
        )
        .unwrap()
    }

    #[test]
    fn identity_simplification_is_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let model = small_model(&mut rng, 4, 2, 1);
        let simp = Simplification::new(&model, Matrix64::identity(4, 4)).unwrap();
        assert_eq!(simp.d_basis().ncols(), 0);
        assert_eq!(simp.g_tilde(), model.g());
        assert_eq!(simp.y_tilde(), model.y());
        let check = simp.check_optimality(&model, DEFAULT_OPTIMALITY_TOL);
        assert!(check.is_optimal);
        assert_eq!(check.data_residual, 0.0);

        let (sigma_v, errs) = propagate_prior(&model, &simp);
        assert!((sigma_v - model.sigma_x()).norm() < 1e-12);
        assert_eq!(errs.sigma_u.nrows(), 0);
    }

    #[test]
    fn random_simplification_has_orthogonal_cokernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = small_model(&mut rng, 8, 4, 2);
        let c = random_matrix(&mut rng, 8, 3);
        let simp = Simplification::new(&model, c).unwrap();
        assert_eq!((simp.g_tilde().nrows(), simp.g_tilde().ncols()), (4, 3));
        assert_eq!(simp.d_basis().ncols(), 5);
        assert!((simp.d_basis().transpose() * simp.c()).norm() < 1e-10);
        let dtd = simp.d_basis().transpose() * simp.d_basis();
        assert!((dtd - Matrix64::identity(5, 5)).norm() < 1e-10);
    }

    #[test]
    fn rank_deficient_simplification_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = small_model(&mut rng, 5, 2, 1);
        let mut c = random_matrix(&mut rng, 5, 3);
        let col0 = c.column(0).into_owned();
        c.set_column(2, &(col0 * 2.0));
        assert!(matches!(
            Simplification::new(&model, c),
            Err(Error::RankDeficientSimplification { .. })
        ));
    }

    #[test]
    fn expansion_is_unique() {
        // Recover (v, u) from x = Cv + Du via C⁺x and Dᵀx.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let model = small_model(&mut rng, 7, 3, 2);
        let c = random_matrix(&mut rng, 7, 2);
        let simp = Simplification::new(&model, c).unwrap();
        let v = Vector64::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
        let u = Vector64::from_fn(5, |_, _| rng.random_range(-1.0..1.0));
        let x = simp.c() * &v + simp.d_basis() * &u;
        assert!((simp.c_pinv() * &x - &v).norm() < 1e-10);
        assert!((simp.d_basis().transpose() * &x - &u).norm() < 1e-10);
    }

    #[test]
    fn optimal_construction_full_rank_z() {
        let model = HighFidelityModel::new(
            Matrix64::from_row_slice(1, 2, &[1.0, 0.0]),
            Matrix64::from_row_slice(1, 2, &[0.0, 1.0]),
            Matrix64::identity(2, 2),
            Matrix64::identity(1, 1),
            Matrix64::identity(1, 1),
        )
        .unwrap();
        let simp = Simplification::optimal(&model).unwrap();
        assert_eq!(simp.dim_v(), 2);
        assert!(simp
            .check_optimality(&model, DEFAULT_OPTIMALITY_TOL)
            .is_optimal);
    }

    #[test]
    fn optimal_construction_rank_one_z() {
        let row = Matrix64::from_row_slice(1, 2, &[1.0, 1.0]);
        let model = HighFidelityModel::new(
            row.clone(),
            row,
            Matrix64::identity(2, 2),
            Matrix64::identity(1, 1),
            Matrix64::identity(1, 1),
        )
        .unwrap();
        let simp = Simplification::optimal(&model).unwrap();
        assert_eq!(simp.dim_v(), 1);
        let col = simp.c().column(0);
        let expected = 1.0 / 2.0_f64.sqrt();
        assert!((col[0].abs() - expected).abs() < 1e-12);
        assert!((col[0] - col[1]).abs() < 1e-12);
    }

    #[test]
    fn optimal_construction_passes_check_on_random_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let model = small_model(&mut rng, 9, 3, 2);
            let simp = Simplification::optimal(&model).unwrap();
            let check = simp.check_optimality(&model, 1e-10);
            assert!(
                check.is_optimal,
                "residuals {:e} {:e}",
                check.data_residual, check.pred_residual
            );
        }
    }

    #[test]
    fn averaging_simplification_propagates_prior() {
        // C = [1; 1] with Σx = I: Σv = C⁺C⁺ᵀ = 1/2, and Σu = DᵀD = 1
        // since the cokernel basis is orthonormal.
        let model = HighFidelityModel::new(
            Matrix64::from_row_slice(1, 2, &[1.0, 0.0]),
            Matrix64::from_row_slice(1, 2, &[0.0, 1.0]),
            Matrix64::identity(2, 2),
            Matrix64::identity(1, 1),
            Matrix64::identity(1, 1),
        )
        .unwrap();
        let simp = Simplification::new(&model, Matrix64::from_row_slice(2, 1, &[1.0, 1.0])).unwrap();
        let (sigma_v, errs) = propagate_prior(&model, &simp);
        assert!((sigma_v[(0, 0)] - 0.5).abs() < 1e-12);
        assert!((errs.sigma_u[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(errs.sigma_vu.norm() < 1e-12);
    }

    #[test]
    fn joint_propagated_covariance_is_psd_and_matches_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let model = small_model(&mut rng, 6, 2, 2);
        let c = random_matrix(&mut rng, 6, 3);
        let simp = Simplification::new(&model, c).unwrap();
        let (sigma_v, errs) = propagate_prior(&model, &simp);

        // [C⁺; Dᵀ] Σx [C⁺ᵀ, D] assembled directly.
        let t = crate::linalg::vstack(&simp.c_pinv().clone(), &simp.d_basis().transpose());
        let joint_direct = &t * model.sigma_x() * t.transpose();
        let k = simp.dim_v();
        let m = simp.d_basis().ncols();
        let mut joint = Matrix64::zeros(k + m, k + m);
        joint.view_mut((0, 0), (k, k)).copy_from(&sigma_v);
        joint.view_mut((0, k), (k, m)).copy_from(&errs.sigma_vu);
        joint
            .view_mut((k, 0), (m, k))
            .copy_from(&errs.sigma_vu.transpose());
        joint.view_mut((k, k), (m, m)).copy_from(&errs.sigma_u);
        assert!((joint.clone() - joint_direct).norm() < 1e-10);
        assert!(sym_eigenvalues(&joint)[0] > -1e-10);
    }

    #[test]
    fn balanced_error_vanishes_for_optimal_simplification() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let model = small_model(&mut rng, 8, 3, 2);
        let simp = Simplification::optimal(&model).unwrap();
        let (sigma_v, _) = propagate_prior(&model, &simp);
        let residual = balanced_error_residual(&model, &simp, &sigma_v).unwrap();
        assert!(residual.norm() < 1e-10);
    }

    #[test]
    fn balanced_error_vanishes_by_construction() {
        // Build Y = A C⁺ + (A Eⁿ G D) Dᵀ so the condition holds exactly.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let dx = 7;
        let (dd, dp, dv) = (3, 2, 2);
        let g = random_matrix(&mut rng, dd, dx);
        let sigma_x = random_spd(&mut rng, dx);
        let sigma_ed = random_spd(&mut rng, dd);
        let c = random_matrix(&mut rng, dx, dv);
        let scratch = HighFidelityModel::new(
            g.clone(),
            Matrix64::zeros(dp, dx),
            sigma_x.clone(),
            sigma_ed.clone(),
            Matrix64::identity(dp, dp),
        )
        .unwrap();
        let simp = Simplification::new(&scratch, c.clone()).unwrap();
        let (sigma_v, _) = propagate_prior(&scratch, &simp);
        let g_tilde = simp.g_tilde();
        let innovation = g_tilde * &sigma_v * g_tilde.transpose() + &sigma_ed;
        let estimator = &sigma_v * g_tilde.transpose() * innovation.try_inverse().unwrap();

        let a = random_matrix(&mut rng, dp, dv);
        let gd = &g * simp.d_basis();
        let y = &a * simp.c_pinv() + (&a * estimator * gd) * simp.d_basis().transpose();
        let model = HighFidelityModel::new(
            g,
            y,
            sigma_x,
            sigma_ed,
            Matrix64::identity(dp, dp),
        )
        .unwrap();
        let simp = Simplification::new(&model, c).unwrap();
        let (sigma_v, _) = propagate_prior(&model, &simp);
        let residual = balanced_error_residual(&model, &simp, &sigma_v).unwrap();
        assert!(residual.norm() < 1e-10, "residual {:e}", residual.norm());
    }

    use crate::Vector64;
}
