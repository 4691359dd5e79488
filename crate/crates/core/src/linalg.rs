//! Dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> CMat {
    assert_eq!(data.len(), rows * cols);
    CMat::from_fn(rows, cols, |i, j| re(data[i * cols + j]))
}

pub fn diag_real(values: &[f64]) -> CMat {
    let n = values.len();
    CMat::from_fn(n, n, |i, j| if i == j { re(values[i]) } else { C64::new(0.0, 0.0) })
}

/// Singular values in descending order. Empty matrices have none.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn sigma_min(m: &CMat) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// `sigma_min / sigma_max`, zero for the zero matrix.
pub fn rcond(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

pub fn condition_number(m: &CMat) -> f64 {
    let r = rcond(m);
    if r == 0.0 {
        f64::INFINITY
    } else {
        1.0 / r
    }
}

/// LU inverse guarded by a reciprocal-condition check.
pub fn inverse(m: &CMat, threshold: f64) -> Result<CMat> {
    let r = rcond(m);
    if !(r > threshold) {
        return Err(Error::SingularMatrix { rcond: r, threshold });
    }
    m.clone()
        .lu()
        .try_inverse()
        .ok_or(Error::SingularMatrix { rcond: r, threshold })
}

/// LU inverse without the SVD condition estimate, for hot loops where the
/// caller already knows the matrix is regular.
pub fn inverse_fast(m: &CMat) -> Option<CMat> {
    m.clone().lu().try_inverse()
}

pub fn numerical_rank(m: &CMat, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let Some(&hi) = s.first() else { return 0 };
    if hi == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * hi).count()
}

/// Full SVD `m = U S V^H` through faer. nalgebra's complex SVD returns
/// inaccurate singular vectors on rank-deficient input, so every routine that
/// needs the factors goes through here.
fn svd_full(m: &CMat) -> (Vec<f64>, CMat, CMat) {
    let f = faer::Mat::<C64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let svd = f.svd().expect("faer svd converged");
    let (u, v) = (svd.U(), svd.V());
    let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    let u = CMat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]);
    let v = CMat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)]);
    (s, u, v)
}

/// Complex Schur form `m = Q T Q^H` with `T` upper triangular.
///
/// nalgebra's shifted QR can cycle without converging on some matrices, so
/// the iteration count is capped and a stalled run is retried on
/// `W^H m W` for a few fixed unitary `W`.
pub fn schur(m: &CMat) -> Result<(CMat, CMat)> {
    let n = m.nrows();
    let cap = 100 * n.max(10);
    if let Some(s) = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, cap) {
        return Ok(s.unpack());
    }
    for attempt in 1..=SCHUR_RETRIES {
        let w = fixed_unitary(n, attempt);
        let rotated = w.adjoint() * m * &w;
        if let Some(s) = nalgebra::Schur::try_new(rotated, f64::EPSILON, cap) {
            let (q, t) = s.unpack();
            return Ok((w * q, t));
        }
    }
    Err(Error::SchurNoConvergence {
        n,
        attempts: SCHUR_RETRIES + 1,
    })
}

const SCHUR_RETRIES: usize = 4;

/// Deterministic unitary from the QR factor of a quasi-random phase matrix.
fn fixed_unitary(n: usize, seed: usize) -> CMat {
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    let z = CMat::from_fn(n, n, |i, j| {
        let k = (seed * n * n + i * n + j + 1) as f64;
        C64::from_polar(1.0 + (k * GOLDEN).fract(), std::f64::consts::TAU * (k * k * GOLDEN).fract())
    });
    z.qr().q()
}

/// Orthonormal basis of the null space, as columns.
pub fn null_space(m: &CMat, rel_tol: f64) -> CMat {
    let n = m.ncols();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return identity(n);
    }
    let (s, _, v) = svd_full(m);
    let hi = s.iter().copied().fold(0.0_f64, f64::max);
    let cols: Vec<CVec> = (0..n)
        .filter(|&k| hi == 0.0 || s.get(k).is_none_or(|&x| x <= rel_tol * hi))
        .map(|k| v.column(k).into_owned())
        .collect();
    if cols.is_empty() {
        CMat::zeros(n, 0)
    } else {
        CMat::from_columns(&cols)
    }
}

/// Orthonormal basis of the column space (via SVD).
pub fn orthonormal_basis(m: &CMat, rel_tol: f64) -> CMat {
    if m.ncols() == 0 || m.nrows() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let (s, u, _) = svd_full(m);
    let hi = s.iter().copied().fold(0.0_f64, f64::max);
    let cols: Vec<CVec> = (0..s.len())
        .filter(|&k| hi > 0.0 && s[k] > rel_tol * hi)
        .map(|k| u.column(k).into_owned())
        .collect();
    if cols.is_empty() {
        CMat::zeros(m.nrows(), 0)
    } else {
        CMat::from_columns(&cols)
    }
}

/// Largest principal angle (radians) between the column spans of `a` and `b`.
///
/// Computed through sines, `|(I - Q_b Q_b^H) Q_a|`, which stays accurate for
/// tiny angles. Spans of different dimension give `pi/2`.
pub fn max_principal_angle(a: &CMat, b: &CMat) -> f64 {
    let qa = orthonormal_basis(a, 1e-12);
    let qb = orthonormal_basis(b, 1e-12);
    if qa.ncols() != qb.ncols() {
        return std::f64::consts::FRAC_PI_2;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    let residual = &qa - &qb * (qb.adjoint() * &qa);
    spectral_norm(&residual).min(1.0).asin()
}

pub fn is_hermitian(m: &CMat, rel_tol: f64) -> (bool, f64) {
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let margin = (m - m.adjoint()).norm() / scale;
    (margin <= rel_tol, margin)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

/// `H^{-1/2}` for Hermitian positive definite `H`.
pub fn hermitian_inv_sqrt(h: &CMat) -> Result<CMat> {
    let (values, vectors) = hermitian_eigen(h);
    let hi = values.iter().copied().fold(0.0_f64, |a, b| a.max(b.abs()));
    if let Some(&lo) = values.first() {
        if !(lo > 0.0) {
            return Err(Error::NotSymmetric {
                reason: "matrix is not positive definite".into(),
                margin: lo / hi.max(f64::MIN_POSITIVE),
            });
        }
    }
    let d = CMat::from_diagonal(&CVec::from_iterator(
        values.len(),
        values.iter().map(|&v| re(1.0 / v.sqrt())),
    ));
    Ok(&vectors * d * vectors.adjoint())
}

/// Moore-Penrose pseudoinverse.
pub fn pseudo_inverse(m: &CMat, rel_tol: f64) -> CMat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return CMat::zeros(m.ncols(), m.nrows());
    }
    let (s, u, v) = svd_full(m);
    let hi = s.iter().copied().fold(0.0_f64, f64::max);
    let mut out = CMat::zeros(m.ncols(), m.nrows());
    for (k, &sk) in s.iter().enumerate() {
        if hi > 0.0 && sk > rel_tol * hi {
            out += v.column(k) * u.column(k).adjoint() * re(1.0 / sk);
        }
    }
    out
}

/// Solves `S^H X + X S = -Q` for `X` by a Kronecker-product linear solve.
///
/// Intended for the small `mu x mu` blocks of the stable dynamics.
pub fn lyapunov(s: &CMat, q: &CMat) -> Result<CMat> {
    let n = s.nrows();
    let sh = s.adjoint();
    let eye = identity(n);
    let mut k = CMat::zeros(n * n, n * n);
    // vec(S^H X) = (I kron S^H) vec X, vec(X S) = (S^T kron I) vec X.
    k += eye.kronecker(&sh);
    k += s.transpose().kronecker(&eye);
    let rhs = CVec::from_iterator(n * n, q.iter().map(|&v| -v));
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularMatrix { rcond: 0.0, threshold: 0.0 })?;
    Ok(CMat::from_column_slice(n, n, sol.as_slice()))
}

/// Principal square root with non-negative real part.
#[inline]
pub fn principal_sqrt(z: C64) -> C64 {
    let r = z.sqrt();
    if r.re < 0.0 {
        -r
    } else {
        r
    }
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
