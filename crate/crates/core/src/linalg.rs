//! Thin wrappers over dense factorizations, plus scalar minimization.
//!
//! Everything downstream funnels its numerics through these five entry points
//! so tolerance conventions live in one place: QR for full-rank least squares,
//! SVD for minimum-norm solves of possibly deficient systems, a symmetric
//! eigendecomposition for null-space bases, full-pivot LU for square solves,
//! and golden-section search for one-dimensional minimization.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative rank tolerance shared by the factorizations below.
const RANK_TOL: f64 = 1e-10;

/// Least squares min ||a x - b|| by QR. Requires full column rank, detected
/// from the diagonal of R at a relative tolerance of 1e-10.
pub fn solve_lls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::Singular(format!(
            "least squares needs at least as many rows as columns, got {m}x{n}"
        )));
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let max_diag = (0..n).map(|i| r[(i, i)].abs()).fold(0.0f64, f64::max);
    if max_diag == 0.0 {
        return Err(Error::Singular("zero regressor".into()));
    }
    for i in 0..n {
        if r[(i, i)].abs() < RANK_TOL * max_diag {
            return Err(Error::Singular(format!(
                "column-rank deficiency: |R[{i},{i}]| = {:.3e} below {:.3e}",
                r[(i, i)].abs(),
                RANK_TOL * max_diag
            )));
        }
    }
    let qtb = qr.q().transpose() * b;
    r.solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::Singular("upper-triangular solve failed".into()))
}

/// Minimum-norm solution of a x = b via SVD, tolerating rank deficiency.
/// Singular values below 1e-12 of the largest are treated as zero.
pub fn min_norm_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let max_sv = svd.singular_values.amax();
    let eps = if max_sv > 0.0 { 1e-12 * max_sv } else { 1.0 };
    svd.solve(b, eps)
        .map_err(|e| Error::Singular(format!("svd solve: {e}")))
}

/// Orthonormal basis (columns) for the null space of `a`, from the symmetric
/// eigendecomposition of a^T a. Eigenvalues below 1e-10 of the largest count
/// as zero. Returns an n x 0 matrix when `a` has full column rank.
pub fn nullspace_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    let gram = a.transpose() * a;
    let eig = gram.symmetric_eigen();
    let max_ev = eig.eigenvalues.amax().max(0.0);
    let tol = if max_ev > 0.0 { RANK_TOL * max_ev } else { 0.5 };
    let null_idx: Vec<usize> = (0..n)
        .filter(|&i| eig.eigenvalues[i] < tol)
        .collect();
    DMatrix::from_fn(n, null_idx.len(), |r, c| eig.eigenvectors[(r, null_idx[c])])
}

/// Square solve via full-pivot LU.
pub fn solve_linear(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let lu = a.clone().full_piv_lu();
    if !lu.is_invertible() {
        return Err(Error::Singular(format!(
            "{}x{} system is singular",
            a.nrows(),
            a.ncols()
        )));
    }
    lu.solve(b)
        .ok_or_else(|| Error::Singular("LU solve failed".into()))
}

#[derive(Debug, Clone, Copy)]
pub struct GoldenResult {
    pub x: f64,
    pub value: f64,
}

/// Golden-section minimization on [lo, hi]. 120 iterations shrink the bracket
/// far below where comparisons of f can still order points, so the abscissa
/// is accurate to about sqrt(machine eps) relative near a smooth minimum
/// (the value itself is then accurate to machine precision). Assumes f is
/// unimodal on the interval; with a monotone f the result collapses to the
/// appropriate endpoint.
pub fn minimize_scalar(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> GoldenResult {
    debug_assert!(lo < hi);
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..120 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    GoldenResult { x, value: f(x) }
}

/// Golden-section maximization; see [`minimize_scalar`].
pub fn maximize_scalar(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> GoldenResult {
    let r = minimize_scalar(|x| -f(x), lo, hi);
    GoldenResult {
        x: r.x,
        value: -r.value,
    }
}
