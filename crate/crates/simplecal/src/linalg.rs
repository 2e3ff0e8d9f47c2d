//! Dense linear-algebra primitives shared by every module: rank-revealing
//! SVD with a relative tolerance, Moore–Penrose pseudoinverse, orthonormal
//! complements, and eigenvalue-based PSD tests.

use crate::{real, Error, Matrix, Result, Scalar, Vector, DEFAULT_PSD_TOL};

/// Iteration cap handed to nalgebra's SVD before declaring non-convergence.
const SVD_MAX_ITER: usize = 10_000;

/// Rank-revealing singular value decomposition `m = U S Vᵀ`.
///
/// `u` is `rows x k` and `vt` is `k x cols` with `k = min(rows, cols)`;
/// singular values are sorted descending and `numeric_rank` counts those
/// above `rank_tol` times the largest one. Factor signs are canonicalized so
/// the first non-negligible entry of every right singular vector is
/// positive, which makes downstream bases reproducible across runs.
#[derive(Debug, Clone)]
pub struct SvdFactors<T: Scalar> {
    pub u: Matrix<T>,
    pub singular_values: Vector<T>,
    pub vt: Matrix<T>,
    pub numeric_rank: usize,
}

impl<T: Scalar> SvdFactors<T> {
    /// `U S Vᵀ`, for reconstruction-error checks.
    pub fn reconstruct(&self) -> Matrix<T> {
        let k = self.singular_values.len();
        let mut us = self.u.clone();
        for j in 0..k {
            let s = self.singular_values[j];
            us.column_mut(j).scale_mut(s);
        }
        us * &self.vt
    }

    /// Moore–Penrose pseudoinverse `V_r S_r⁻¹ U_rᵀ` over the numeric rank.
    pub fn pseudoinverse(&self) -> Matrix<T> {
        let r = self.numeric_rank;
        let (rows, cols) = (self.u.nrows(), self.vt.ncols());
        if r == 0 {
            return Matrix::zeros(cols, rows);
        }
        let v_r = self.vt.rows(0, r).transpose();
        let mut ut_r = self.u.columns(0, r).transpose();
        for i in 0..r {
            let inv = T::one() / self.singular_values[i];
            ut_r.row_mut(i).scale_mut(inv);
        }
        v_r * ut_r
    }
}

pub(crate) fn ensure_finite<T: Scalar>(name: &'static str, m: &Matrix<T>) -> Result<()> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidMatrix {
            name,
            reason: "contains non-finite entries".into(),
        });
    }
    Ok(())
}

/// Compute the SVD of `m` with numeric rank determined by `rank_tol`
/// relative to the largest singular value.
///
/// Computed by one-sided Jacobi orthogonalization warm-started from
/// nalgebra's right singular factor. The implicit-QR SVD alone is not good
/// enough here: with a machine-epsilon convergence threshold it can return
/// an invalid factorization outright (observed on near-idempotent 2x2
/// blocks), and even when it converges its reconstruction error sits around
/// 1e-11 relative on modest rectangular inputs. The Jacobi sweeps do not
/// depend on the warm start for correctness, only for speed, and deliver
/// reconstruction at a small multiple of machine epsilon.
pub fn svd<T: Scalar>(m: &Matrix<T>, rank_tol: T) -> Result<SvdFactors<T>> {
    ensure_finite("svd input", m)?;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(SvdFactors {
            u: Matrix::zeros(m.nrows(), 0),
            singular_values: Vector::zeros(0),
            vt: Matrix::zeros(0, m.ncols()),
            numeric_rank: 0,
        });
    }
    let (mut u, mut sv, mut vt) = if m.nrows() >= m.ncols() {
        svd_tall(m)?
    } else {
        // W = (Wᵀ)ᵀ = (U' S V'ᵀ)ᵀ: left and right factors swap roles.
        let (ut, sv, vtt) = svd_tall(&m.transpose())?;
        (vtt.transpose(), sv, ut.transpose())
    };
    sort_descending(&mut u, &mut sv, &mut vt);
    canonicalize_signs(&mut u, &mut vt);
    let mut factors = SvdFactors {
        u,
        singular_values: sv,
        vt,
        numeric_rank: 0,
    };
    let accept = real::<T>(1e4) * T::default_epsilon() * m.norm().max(T::one());
    if (factors.reconstruct() - m).norm() > accept {
        return Err(Error::NumericalFailure(
            "SVD did not converge to a valid factorization".into(),
        ));
    }
    factors.numeric_rank = numeric_rank(&factors.singular_values, rank_tol);
    Ok(factors)
}

/// Factor a tall matrix (rows >= cols) as `U S Vᵀ` with `U` rows x cols and
/// `Vᵀ` cols x cols, unsorted.
fn svd_tall<T: Scalar>(a: &Matrix<T>) -> Result<(Matrix<T>, Vector<T>, Matrix<T>)> {
    let n = a.ncols();
    let warm_start = a
        .clone()
        .try_svd(false, true, T::default_epsilon() * real(100.0), SVD_MAX_ITER)
        .map(|d| d.v_t.expect("v_t requested").transpose());
    let mut v = warm_start.unwrap_or_else(|| Matrix::identity(n, n));
    let mut b = a * &v;
    jacobi_orthogonalize(&mut b, &mut v)?;

    let mut sv = Vector::zeros(n);
    let mut u = Matrix::zeros(a.nrows(), n);
    let mut dropped = Vec::new();
    let col_norms: Vec<T> = (0..n).map(|j| b.column(j).norm()).collect();
    let sigma_max = col_norms.iter().fold(T::zero(), |acc, &s| acc.max(s));
    let floor = sigma_max * T::default_epsilon();
    for j in 0..n {
        sv[j] = col_norms[j];
        if col_norms[j] > floor && col_norms[j] > T::zero() {
            let inv = T::one() / col_norms[j];
            u.column_mut(j).copy_from(&(b.column(j) * inv));
        } else {
            dropped.push(j);
        }
    }
    // Columns with numerically zero weight get an orthonormal completion so
    // UᵀU = I holds for the full compact factor.
    if !dropped.is_empty() {
        complete_orthonormal_columns(&mut u, &dropped);
    }
    Ok((u, sv, v.transpose()))
}

/// Hestenes one-sided Jacobi: rotate column pairs of `b` (and `v`) until all
/// pairs are mutually orthogonal relative to machine precision.
fn jacobi_orthogonalize<T: Scalar>(b: &mut Matrix<T>, v: &mut Matrix<T>) -> Result<()> {
    let n = b.ncols();
    // Inner products of length-m columns carry O(m·eps) rounding noise;
    // demanding orthogonality below that level never converges.
    let tol = T::default_epsilon() * real::<T>(4.0 * b.nrows().max(4) as f64);
    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let alpha = b.column(p).norm_squared();
                let beta = b.column(q).norm_squared();
                let gamma = b.column(p).dot(&b.column(q));
                if alpha == T::zero() || beta == T::zero() {
                    continue;
                }
                // A column whose norm is below roundoff relative to its
                // partner cannot be meaningfully orthogonalized against it.
                let eps = T::default_epsilon();
                if beta <= alpha * eps * eps || alpha <= beta * eps * eps {
                    continue;
                }
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                let zeta = (beta - alpha) / (gamma + gamma);
                let t = if zeta >= T::zero() {
                    T::one() / (zeta + (T::one() + zeta * zeta).sqrt())
                } else {
                    -T::one() / (-zeta + (T::one() + zeta * zeta).sqrt())
                };
                // An angle below machine resolution cannot change b; doing
                // it anyway would spin the sweep loop forever.
                if t.abs() <= eps {
                    continue;
                }
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = cs * t;
                rotate_columns(b, p, q, cs, sn);
                rotate_columns(v, p, q, cs, sn);
                rotated = true;
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::NumericalFailure(
        "Jacobi SVD sweeps did not converge".into(),
    ))
}

fn rotate_columns<T: Scalar>(m: &mut Matrix<T>, p: usize, q: usize, cs: T, sn: T) {
    for i in 0..m.nrows() {
        let mp = m[(i, p)];
        let mq = m[(i, q)];
        m[(i, p)] = cs * mp - sn * mq;
        m[(i, q)] = sn * mp + cs * mq;
    }
}

/// Fill the listed columns of `u` with unit vectors orthogonal to all
/// already-valid columns, chosen greedily from the standard basis.
fn complete_orthonormal_columns<T: Scalar>(u: &mut Matrix<T>, fill: &[usize]) {
    let m = u.nrows();
    let mut pending: Vec<usize> = fill.to_vec();
    while let Some(col) = pending.first().copied() {
        pending.remove(0);
        let valid: Vec<usize> = (0..u.ncols())
            .filter(|j| *j != col && !pending.contains(j))
            .collect();
        let mut best: Option<(T, Vector<T>)> = None;
        for cand in 0..m {
            let mut r = Vector::zeros(m);
            r[cand] = T::one();
            // Two orthogonalization passes keep the residual orthogonal to
            // working precision.
            for _ in 0..2 {
                for &j in &valid {
                    let proj = u.column(j).dot(&r);
                    let col_j = u.column(j).into_owned();
                    r -= col_j * proj;
                }
            }
            let norm = r.norm();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, r));
            }
        }
        let (norm, r) = best.expect("nonzero dimension");
        u.column_mut(col).copy_from(&(r / norm));
    }
}

fn sort_descending<T: Scalar>(u: &mut Matrix<T>, sv: &mut Vector<T>, vt: &mut Matrix<T>) {
    let k = sv.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).expect("finite singular values"));
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        return;
    }
    let sv_old = sv.clone();
    let u_old = u.clone();
    let vt_old = vt.clone();
    for (dst, &src) in order.iter().enumerate() {
        sv[dst] = sv_old[src];
        u.column_mut(dst).copy_from(&u_old.column(src));
        vt.row_mut(dst).copy_from(&vt_old.row(src));
    }
}

fn numeric_rank<T: Scalar>(sv: &Vector<T>, rank_tol: T) -> usize {
    match sv.iter().copied().next() {
        Some(s0) if s0 > T::zero() => sv.iter().filter(|&&s| s > rank_tol * s0).count(),
        _ => 0,
    }
}

/// Flip paired singular-vector signs so each right singular vector has a
/// positive first non-negligible entry.
fn canonicalize_signs<T: Scalar>(u: &mut Matrix<T>, vt: &mut Matrix<T>) {
    let thresh = real::<T>(1e-9);
    for i in 0..vt.nrows() {
        let lead = vt.row(i).iter().copied().find(|x| x.abs() > thresh);
        if let Some(x) = lead {
            if x < T::zero() {
                vt.row_mut(i).neg_mut();
                if i < u.ncols() {
                    u.column_mut(i).neg_mut();
                }
            }
        }
    }
}

/// Moore–Penrose pseudoinverse with numeric rank controlled by `rank_tol`.
pub fn pseudoinverse<T: Scalar>(m: &Matrix<T>, rank_tol: T) -> Result<Matrix<T>> {
    Ok(svd(m, rank_tol)?.pseudoinverse())
}

/// Orthonormal basis for the orthogonal complement of `range(basis)` in
/// R^n, where `basis` is `n x k` with orthonormal columns. Returns an
/// `n x (n - k)` matrix; computed from the SVD of the complement projector
/// `I - B Bᵀ`, whose singular values are 0/1 to roundoff.
pub(crate) fn orthonormal_complement<T: Scalar>(basis: &Matrix<T>) -> Result<Matrix<T>> {
    let n = basis.nrows();
    let k = basis.ncols();
    if k >= n {
        return Ok(Matrix::zeros(n, 0));
    }
    let projector = Matrix::identity(n, n) - basis * basis.transpose();
    let factors = svd(&projector, real(0.5))?;
    let m = factors.numeric_rank;
    debug_assert_eq!(m, n - k, "complement projector rank");
    Ok(factors.u.columns(0, m).into_owned())
}

/// Orthonormal basis `D` for the cokernel of `c` (the subspace
/// perpendicular to `range(c)`), with `DᵀD = I` and `Dᵀc = 0`.
///
/// `c` must have full column rank; a rank-deficient input means the simple
/// model wastes parameters and is rejected.
pub fn cokernel_basis<T: Scalar>(c: &Matrix<T>, rank_tol: T) -> Result<Matrix<T>> {
    let factors = svd(c, rank_tol)?;
    if factors.numeric_rank < c.ncols() {
        return Err(Error::RankDeficientSimplification {
            rows: c.nrows(),
            cols: c.ncols(),
            rank: factors.numeric_rank,
        });
    }
    orthonormal_complement(&factors.u.columns(0, c.ncols()).into_owned())
}

/// `(m + mᵀ)/2`, used after every covariance update to suppress round-off
/// asymmetry.
pub fn symmetrize<T: Scalar>(m: &Matrix<T>) -> Matrix<T> {
    let half = real::<T>(0.5);
    (m + m.transpose()).scale(half)
}

/// Eigenvalues of the symmetrized matrix, sorted ascending.
pub fn sym_eigenvalues<T: Scalar>(m: &Matrix<T>) -> Vector<T> {
    if m.nrows() == 0 {
        return Vector::zeros(0);
    }
    let eig = symmetrize(m).symmetric_eigen();
    let mut vals: Vec<T> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Vector::from_vec(vals)
}

/// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
pub fn spectral_norm_sym<T: Scalar>(m: &Matrix<T>) -> T {
    sym_eigenvalues(m)
        .iter()
        .fold(T::zero(), |acc, &v| acc.max(v.abs()))
}

/// Check that `m` is symmetric PSD: eigenvalues of the symmetrized matrix
/// at least `-psd_tol * ||m||_2`, and asymmetry below the same band.
pub fn check_psd<T: Scalar>(name: &'static str, m: &Matrix<T>, psd_tol: T) -> Result<()> {
    ensure_finite(name, m)?;
    if m.nrows() != m.ncols() {
        return Err(Error::NotPsd {
            name,
            reason: format!("not square ({}x{})", m.nrows(), m.ncols()),
        });
    }
    if m.nrows() == 0 {
        return Ok(());
    }
    let scale = spectral_norm_sym(m).max(T::default_epsilon());
    let asym = (m - m.transpose()).norm();
    if asym > psd_tol.sqrt() * scale {
        return Err(Error::NotPsd {
            name,
            reason: format!("asymmetry {asym:?} exceeds tolerance"),
        });
    }
    let min_eig = sym_eigenvalues(m)[0];
    if min_eig < -psd_tol * scale {
        return Err(Error::NotPsd {
            name,
            reason: format!("minimum eigenvalue {min_eig:?}"),
        });
    }
    Ok(())
}

pub(crate) fn default_psd_tol<T: Scalar>() -> T {
    real(DEFAULT_PSD_TOL)
}

/// Invert a symmetric positive-definite innovation matrix. Cholesky first;
/// if that fails but the matrix still has full numeric rank the
/// pseudoinverse is used and a warning logged, otherwise the matrix is
/// singular to tolerance and the update cannot proceed.
pub(crate) fn invert_innovation<T: Scalar>(s: &Matrix<T>, rank_tol: T) -> Result<Matrix<T>> {
    let sym = symmetrize(s);
    if let Some(chol) = sym.clone().cholesky() {
        return Ok(chol.inverse());
    }
    let factors = svd(&sym, rank_tol)?;
    if factors.numeric_rank < sym.nrows() {
        return Err(Error::SingularInnovation {
            order: sym.nrows(),
            rank: factors.numeric_rank,
        });
    }
    log::warn!(
        "innovation matrix ({}x{}) failed Cholesky; falling back to pseudoinverse",
        sym.nrows(),
        sym.ncols()
    );
    Ok(factors.pseudoinverse())
}

/// Stack two matrices with equal column counts on top of each other.
pub(crate) fn vstack<T: Scalar>(top: &Matrix<T>, bottom: &Matrix<T>) -> Matrix<T> {
    debug_assert_eq!(top.ncols(), bottom.ncols());
    let rows = top.nrows() + bottom.nrows();
    Matrix::from_fn(rows, top.ncols(), |i, j| {
        if i < top.nrows() {
            top[(i, j)]
        } else {
            bottom[(i - top.nrows(), j)]
        }
    })
}
