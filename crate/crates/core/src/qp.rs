//! Convex quadratic programming.
//!
//! Problems are stated as
//!
//! ```text
//! minimize   (1/2) x^T H x + f^T x
//! subject to A_eq x  = b_eq
//!            A_in x <= b_in
//! ```
//!
//! with H symmetric positive semidefinite. `solve_qp` is the production
//! solver: it eliminates the equalities through a null-space reduction, then
//! runs a dual active-set method (Goldfarb/Idnani style, with smallest-index
//! constraint selection) on the reduced strictly convex problem. The
//! reduction matters for conditioning: the planners hand us Hessians whose
//! null directions are pinned only by the equality rows, and regularizing the
//! full matrix instead would cost six digits of KKT accuracy.
//!
//! `solve_qp_by_enumeration` is an intentionally naive oracle that tries every
//! subset of inequalities as an active set and solves the resulting KKT
//! systems directly. It is exponential in the number of inequalities and
//! exists to cross-check the real solver in tests.
//!
//! Every answer can be audited with `kkt_residuals`, which reports
//! stationarity, primal feasibility, complementary slackness, and dual signs.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::linalg::{min_norm_solve, nullspace_basis, solve_linear};
use crate::rng::Rng;

/// LDL^T pivots below this are treated as zero and trigger regularization.
const PIVOT_TOL: f64 = 1e-12;
/// Ridge added to a semidefinite reduced Hessian.
const RIDGE: f64 = 1e-10;
/// Asymmetry beyond this (relative to the largest entry) is rejected.
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Qp {
    pub h: DMatrix<f64>,
    pub f: DVector<f64>,
    pub a_eq: DMatrix<f64>,
    pub b_eq: DVector<f64>,
    pub a_in: DMatrix<f64>,
    pub b_in: DVector<f64>,
}

impl Qp {
    /// Unconstrained problem; add constraint blocks by mutating the fields.
    pub fn new(h: DMatrix<f64>, f: DVector<f64>) -> Self {
        let n = f.len();
        Qp {
            h,
            f,
            a_eq: DMatrix::zeros(0, n),
            b_eq: DVector::zeros(0),
            a_in: DMatrix::zeros(0, n),
            b_in: DVector::zeros(0),
        }
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.h.shape() != (n, n) {
            return Err(Error::Domain(format!(
                "hessian is {}x{}, expected {n}x{n}",
                self.h.nrows(),
                self.h.ncols()
            )));
        }
        if self.a_eq.ncols() != n || self.a_eq.nrows() != self.b_eq.len() {
            return Err(Error::Domain("equality block shape mismatch".into()));
        }
        if self.a_in.ncols() != n || self.a_in.nrows() != self.b_in.len() {
            return Err(Error::Domain("inequality block shape mismatch".into()));
        }
        let scale = 1.0 + self.h.amax();
        let asym = (&self.h - self.h.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::Domain(format!(
                "hessian asymmetry {asym:.3e} exceeds {:.3e}",
                SYMMETRY_TOL * scale
            )));
        }
        let finite = self.h.iter().all(|v| v.is_finite())
            && self.f.iter().all(|v| v.is_finite())
            && self.a_eq.iter().all(|v| v.is_finite())
            && self.b_eq.iter().all(|v| v.is_finite())
            && self.a_in.iter().all(|v| v.is_finite())
            && self.b_in.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain("non-finite entry in QP data".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    /// Inequality multipliers, one per row of `a_in`, nonnegative.
    pub mu: DVector<f64>,
    /// Equality multipliers, one per row of `a_eq`.
    pub nu: DVector<f64>,
    pub objective: f64,
    /// Indices of inequality rows active at the solution, ascending.
    pub active: Vec<usize>,
    /// True when the reduced Hessian needed the +1e-10 ridge.
    pub regularized: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct KktReport {
    /// || H x + f + A_eq^T nu + A_in^T mu ||_inf
    pub stationarity: f64,
    /// || A_eq x - b_eq ||_inf
    pub primal_eq: f64,
    /// max(0, max_i (A_in x - b_in)_i)
    pub primal_in: f64,
    /// max_i | mu_i (A_in x - b_in)_i |
    pub complementarity: f64,
    /// max(0, -min_i mu_i)
    pub dual_sign: f64,
}

impl KktReport {
    pub fn max_residual(&self) -> f64 {
        self.stationarity
            .max(self.primal_eq)
            .max(self.primal_in)
            .max(self.complementarity)
            .max(self.dual_sign)
    }
}

pub fn kkt_residuals(qp: &Qp, sol: &QpSolution) -> KktReport {
    let hs = symmetrize(&qp.h);
    let grad = &hs * &sol.x
        + &qp.f
        + qp.a_eq.transpose() * &sol.nu
        + qp.a_in.transpose() * &sol.mu;
    let eq = if qp.b_eq.is_empty() {
        0.0
    } else {
        (&qp.a_eq * &sol.x - &qp.b_eq).amax()
    };
    let m = qp.b_in.len();
    let slack = &qp.a_in * &sol.x - &qp.b_in;
    let mut primal_in = 0.0f64;
    let mut comp = 0.0f64;
    let mut dual = 0.0f64;
    for i in 0..m {
        primal_in = primal_in.max(slack[i]);
        comp = comp.max((sol.mu[i] * slack[i]).abs());
        dual = dual.max(-sol.mu[i]);
    }
    KktReport {
        stationarity: if grad.is_empty() { 0.0 } else { grad.amax() },
        primal_eq: eq,
        primal_in: primal_in.max(0.0),
        complementarity: comp,
        dual_sign: dual.max(0.0),
    }
}

fn symmetrize(h: &DMatrix<f64>) -> DMatrix<f64> {
    (h + h.transpose()) * 0.5
}

/// Smallest LDL^T pivot encountered (stops early once one dips below the
/// tolerance, which is all the caller needs to know).
fn ldlt_min_pivot(g: &DMatrix<f64>) -> f64 {
    let n = g.nrows();
    let mut a = g.clone();
    let mut min_pivot = f64::INFINITY;
    for k in 0..n {
        let piv = a[(k, k)];
        min_pivot = min_pivot.min(piv);
        if piv < PIVOT_TOL {
            return min_pivot;
        }
        for i in (k + 1)..n {
            let l = a[(i, k)] / piv;
            for j in (k + 1)..n {
                a[(i, j)] -= l * a[(k, j)];
            }
        }
    }
    min_pivot
}

pub fn solve_qp(qp: &Qp) -> Result<QpSolution> {
    qp.validate()?;
    let n = qp.n();
    let hs = symmetrize(&qp.h);
    let p = qp.a_eq.nrows();
    let m = qp.a_in.nrows();

    let (x_part, z) = if p > 0 {
        let x_part = min_norm_solve(&qp.a_eq, &qp.b_eq)?;
        let resid = (&qp.a_eq * &x_part - &qp.b_eq).amax();
        if resid > 1e-8 * (1.0 + qp.b_eq.amax()) {
            return Err(Error::QpInfeasible(format!(
                "inconsistent equalities, residual {resid:.3e}"
            )));
        }
        (x_part, nullspace_basis(&qp.a_eq))
    } else {
        (DVector::zeros(n), DMatrix::identity(n, n))
    };
    let r = z.ncols();

    if r == 0 {
        // Equalities pin x completely; inequalities can only be checked.
        for i in 0..m {
            let s = (qp.a_in.row(i) * &x_part)[(0, 0)];
            if s > qp.b_in[i] + 1e-9 * (1.0 + qp.b_in[i].abs()) {
                return Err(Error::QpInfeasible(format!(
                    "equality-determined point violates inequality {i}"
                )));
            }
        }
        let mu = DVector::zeros(m);
        let nu = equality_multipliers(qp, &hs, &x_part, &mu)?;
        let objective = 0.5 * (&hs * &x_part).dot(&x_part) + qp.f.dot(&x_part);
        return Ok(QpSolution {
            x: x_part,
            mu,
            nu,
            objective,
            active: vec![],
            regularized: false,
        });
    }

    let mut g = z.transpose() * &hs * &z;
    g = symmetrize(&g);
    let f_r = z.transpose() * (&hs * &x_part + &qp.f);
    let mut regularized = false;
    if ldlt_min_pivot(&g) < PIVOT_TOL {
        for i in 0..r {
            g[(i, i)] += RIDGE;
        }
        regularized = true;
    }
    let chol = Cholesky::new(g).ok_or_else(|| {
        Error::Unbounded("reduced cost is not positive definite even after regularization".into())
    })?;

    // Reduced inequalities: c w <= d.
    let c = &qp.a_in * &z;
    let d = DVector::from_fn(m, |i, _| qp.b_in[i] - (qp.a_in.row(i) * &x_part)[(0, 0)]);

    let (w, mu, active) = dual_active_set(&chol, &f_r, &c, &d)?;
    let x = &x_part + &z * &w;

    if regularized && x.amax() > 1e8 {
        return Err(Error::Unbounded(
            "solution norm exploded on a semidefinite cost; objective is unbounded below".into(),
        ));
    }

    let nu = equality_multipliers(qp, &hs, &x, &mu)?;
    let objective = 0.5 * (&hs * &x).dot(&x) + qp.f.dot(&x);
    Ok(QpSolution {
        x,
        mu,
        nu,
        objective,
        active,
        regularized,
    })
}

/// Equality multipliers from stationarity: solve A_eq^T nu = -(H x + f +
/// A_in^T mu) in the least-squares sense (exact when KKT holds).
fn equality_multipliers(
    qp: &Qp,
    hs: &DMatrix<f64>,
    x: &DVector<f64>,
    mu: &DVector<f64>,
) -> Result<DVector<f64>> {
    if qp.a_eq.nrows() == 0 {
        return Ok(DVector::zeros(0));
    }
    let rhs = -(hs * x + &qp.f + qp.a_in.transpose() * mu);
    min_norm_solve(&qp.a_eq.transpose(), &rhs)
}

/// Dual active-set iteration on the strictly convex reduced problem
/// min (1/2) w^T G w + a^T w  s.t.  c w <= d, with G given by its Cholesky
/// factor. Internally constraints are handled as n_i^T w >= lb_i with
/// n_i = -c_i, lb_i = -d_i, the natural orientation for this method.
fn dual_active_set(
    chol: &Cholesky<f64, Dyn>,
    a: &DVector<f64>,
    c: &DMatrix<f64>,
    d: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>, Vec<usize>)> {
    let r = a.len();
    let m = c.nrows();
    let mut w = -chol.solve(a);
    let mut act: Vec<usize> = Vec::new();
    let mut u: Vec<f64> = Vec::new();
    let cap = 100 * (m + r + 10);
    let mut iters = 0usize;

    'outer: loop {
        iters += 1;
        if iters > cap {
            return Err(Error::IterationLimit("dual active-set QP".into()));
        }
        // Smallest-index violated constraint (Bland-style, avoids cycling).
        let mut entering: Option<usize> = None;
        for i in 0..m {
            if act.contains(&i) {
                continue;
            }
            let viol = (c.row(i) * &w)[(0, 0)] - d[i];
            if viol > 1e-10 * (1.0 + d[i].abs()) {
                entering = Some(i);
                break;
            }
        }
        let Some(pi) = entering else {
            break 'outer;
        };
        let np = -c.row(pi).transpose();
        let lbp = -d[pi];
        let mut up = 0.0f64; // tentative multiplier of the entering constraint

        loop {
            iters += 1;
            if iters > cap {
                return Err(Error::IterationLimit("dual active-set QP".into()));
            }
            let ginv_np = chol.solve(&np);
            let (zdir, rvec) = if act.is_empty() {
                (ginv_np.clone(), Vec::new())
            } else {
                let nmat = DMatrix::from_fn(r, act.len(), |i, j| -c[(act[j], i)]);
                let ginv_n = chol.solve(&nmat);
                let m_small = nmat.transpose() * &ginv_n;
                let rhs = nmat.transpose() * &ginv_np;
                let rv = solve_linear(&m_small, &rhs).map_err(|_| {
                    Error::Singular("degenerate active set in dual active-set QP".into())
                })?;
                (ginv_np - &ginv_n * &rv, rv.iter().copied().collect())
            };
            let dz = np.dot(&zdir);
            let z_ok = dz > 1e-13 * (1.0 + np.norm() * zdir.norm());

            // Dual blocking step over active constraints with r_j > 0.
            let mut t1 = f64::INFINITY;
            let mut leaving: Option<usize> = None;
            for (j, &rj) in rvec.iter().enumerate() {
                if rj > 1e-12 {
                    let tj = u[j] / rj;
                    if tj < t1 {
                        t1 = tj;
                        leaving = Some(j);
                    }
                }
            }
            // Primal step to the entering constraint boundary.
            let t2 = if z_ok {
                (lbp - np.dot(&w)) / dz
            } else {
                f64::INFINITY
            };

            if !z_ok && leaving.is_none() {
                return Err(Error::QpInfeasible(format!(
                    "constraint {pi} is inconsistent with the active set"
                )));
            }
            let t = t1.min(t2);
            if !t.is_finite() {
                return Err(Error::QpInfeasible(format!(
                    "dual step unbounded while adding constraint {pi}"
                )));
            }
            if z_ok {
                w += &zdir * t;
            }
            for (j, &rj) in rvec.iter().enumerate() {
                u[j] -= t * rj;
            }
            up += t;
            if t2 <= t1 {
                act.push(pi);
                u.push(up);
                continue 'outer;
            }
            let l = leaving.expect("finite t1 implies a leaving index");
            act.remove(l);
            u.remove(l);
        }
    }

    let mut mu = DVector::zeros(m);
    for (j, &i) in act.iter().enumerate() {
        mu[i] = u[j].max(0.0);
    }
    let mut active: Vec<usize> = act;
    active.sort_unstable();
    Ok((w, mu, active))
}

/// Exhaustive oracle: solve the KKT system of every inequality subset and
/// keep the best point that is primal feasible with nonnegative multipliers.
/// Exponential in the inequality count; refuses more than 20 rows.
pub fn solve_qp_by_enumeration(qp: &Qp) -> Result<QpSolution> {
    qp.validate()?;
    let n = qp.n();
    let hs = symmetrize(&qp.h);
    let p = qp.a_eq.nrows();
    let m = qp.a_in.nrows();
    if m > 20 {
        return Err(Error::Domain(format!(
            "enumeration oracle limited to 20 inequalities, got {m}"
        )));
    }

    let mut best: Option<QpSolution> = None;
    for mask in 0u32..(1u32 << m) {
        let subset: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let k = subset.len();
        let dim = n + p + k;
        let mut kkt = DMatrix::zeros(dim, dim);
        let mut rhs = DVector::zeros(dim);
        for i in 0..n {
            for j in 0..n {
                kkt[(i, j)] = hs[(i, j)];
            }
            rhs[i] = -qp.f[i];
        }
        for e in 0..p {
            for j in 0..n {
                kkt[(n + e, j)] = qp.a_eq[(e, j)];
                kkt[(j, n + e)] = qp.a_eq[(e, j)];
            }
            rhs[n + e] = qp.b_eq[e];
        }
        for (s, &i) in subset.iter().enumerate() {
            for j in 0..n {
                kkt[(n + p + s, j)] = qp.a_in[(i, j)];
                kkt[(j, n + p + s)] = qp.a_in[(i, j)];
            }
            rhs[n + p + s] = qp.b_in[i];
        }
        let lu = kkt.clone().full_piv_lu();
        if !lu.is_invertible() {
            continue;
        }
        let Some(sol) = lu.solve(&rhs) else {
            continue;
        };
        // Near-singular KKT systems can pass the pivot test yet return
        // garbage; accept only solves that actually satisfy the system.
        let resid = (&kkt * &sol - &rhs).amax();
        if resid > 1e-8 * (1.0 + rhs.amax()) {
            continue;
        }
        let x = DVector::from_fn(n, |i, _| sol[i]);
        let feasible = (0..m).all(|i| {
            (qp.a_in.row(i) * &x)[(0, 0)] <= qp.b_in[i] + 1e-9 * (1.0 + qp.b_in[i].abs())
        });
        if !feasible {
            continue;
        }
        let dual_ok = (0..k).all(|s| sol[n + p + s] >= -1e-9);
        if !dual_ok {
            continue;
        }
        let objective = 0.5 * (&hs * &x).dot(&x) + qp.f.dot(&x);
        if best.as_ref().is_none_or(|b| objective < b.objective - 1e-12) {
            let mut mu = DVector::zeros(m);
            for (s, &i) in subset.iter().enumerate() {
                mu[i] = sol[n + p + s].max(0.0);
            }
            best = Some(QpSolution {
                x,
                mu,
                nu: DVector::from_fn(p, |e, _| sol[n + e]),
                objective,
                active: subset.clone(),
                regularized: false,
            });
        }
    }
    best.ok_or_else(|| {
        Error::QpInfeasible("enumeration found no feasible stationary point".into())
    })
}

/// Random strictly convex QP, feasible by construction: H = G^T G + 0.05 I,
/// inequality bounds are A x0 plus nonnegative slack for a random interior
/// point x0, and optional equality rows pass through x0 exactly. Used by the
/// solver cross-checks.
pub fn random_strictly_convex_qp(rng: &mut Rng, n: usize, m: usize, n_eq: usize) -> Qp {
    assert!(n_eq < n, "equalities must leave degrees of freedom");
    let gmat = DMatrix::from_fn(n, n, |_, _| rng.normal());
    let mut h = gmat.transpose() * &gmat;
    for i in 0..n {
        h[(i, i)] += 0.05;
    }
    let f = DVector::from_fn(n, |_, _| rng.normal());
    let x0 = DVector::from_fn(n, |_, _| rng.normal());
    let a_in = DMatrix::from_fn(m, n, |_, _| rng.normal());
    let b_in = DVector::from_fn(m, |i, _| (a_in.row(i) * &x0)[(0, 0)] + rng.uniform01());
    let a_eq = DMatrix::from_fn(n_eq, n, |_, _| rng.normal());
    let b_eq = DVector::from_fn(n_eq, |i, _| (a_eq.row(i) * &x0)[(0, 0)]);
    Qp {
        h,
        f,
        a_eq,
        b_eq,
        a_in,
        b_in,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn qp_1d_clamped() -> Qp {
        // min (x-1)^2 s.t. x <= 0; optimum x = 0 with multiplier 2.
        let mut qp = Qp::new(
            DMatrix::from_row_slice(1, 1, &[2.0]),
            DVector::from_row_slice(&[-2.0]),
        );
        qp.a_in = DMatrix::from_row_slice(1, 1, &[1.0]);
        qp.b_in = DVector::from_row_slice(&[0.0]);
        qp
    }

    #[test]
    fn clamped_parabola() {
        let qp = qp_1d_clamped();
        let sol = solve_qp(&qp).unwrap();
        assert_relative_eq!(sol.x[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(sol.mu[0], 2.0, epsilon = 1e-10);
        assert_relative_eq!(sol.objective, 0.0, epsilon = 1e-12);
        assert_eq!(sol.active, vec![0]);
        assert!(kkt_residuals(&qp, &sol).max_residual() < 1e-10);
    }

    #[test]
    fn inactive_constraint_leaves_unconstrained_optimum() {
        let mut qp = qp_1d_clamped();
        qp.b_in[0] = 5.0; // x <= 5 no longer binds
        let sol = solve_qp(&qp).unwrap();
        assert_relative_eq!(sol.x[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(sol.mu[0], 0.0, epsilon = 1e-12);
        assert!(sol.active.is_empty());
    }

    #[test]
    fn equality_projection() {
        // min ||x||^2 s.t. x1 + x2 = 2 -> (1,1), nu = -2.
        let mut qp = Qp::new(DMatrix::identity(2, 2) * 2.0, DVector::zeros(2));
        qp.a_eq = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        qp.b_eq = DVector::from_row_slice(&[2.0]);
        let sol = solve_qp(&qp).unwrap();
        assert_relative_eq!(sol.x[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(sol.x[1], 1.0, epsilon = 1e-10);
        assert_relative_eq!(sol.nu[0], -2.0, epsilon = 1e-9);
        assert!(kkt_residuals(&qp, &sol).max_residual() < 1e-9);
    }

    #[test]
    fn equality_plus_binding_inequality() {
        // min ||x||^2 s.t. x1 + x2 = 2, x1 <= 0.25.
        let mut qp = Qp::new(DMatrix::identity(2, 2) * 2.0, DVector::zeros(2));
        qp.a_eq = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        qp.b_eq = DVector::from_row_slice(&[2.0]);
        qp.a_in = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        qp.b_in = DVector::from_row_slice(&[0.25]);
        let sol = solve_qp(&qp).unwrap();
        assert_relative_eq!(sol.x[0], 0.25, epsilon = 1e-10);
        assert_relative_eq!(sol.x[1], 1.75, epsilon = 1e-10);
        assert_relative_eq!(sol.mu[0], 3.0, epsilon = 1e-9);
        assert_relative_eq!(sol.objective, 3.125, epsilon = 1e-10);
        assert!(kkt_residuals(&qp, &sol).max_residual() < 1e-9);
    }

    #[test]
    fn contradictory_inequalities_are_infeasible() {
        // x <= 0 and -x <= -1 cannot both hold.
        let mut qp = Qp::new(DMatrix::identity(1, 1), DVector::zeros(1));
        qp.a_in = DMatrix::from_row_slice(2, 1, &[1.0, -1.0]);
        qp.b_in = DVector::from_row_slice(&[0.0, -1.0]);
        assert!(matches!(solve_qp(&qp), Err(Error::QpInfeasible(_))));
    }

    #[test]
    fn contradictory_equalities_are_infeasible() {
        let mut qp = Qp::new(DMatrix::identity(2, 2), DVector::zeros(2));
        qp.a_eq = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        qp.b_eq = DVector::from_row_slice(&[1.0, 2.0]);
        assert!(matches!(solve_qp(&qp), Err(Error::QpInfeasible(_))));
    }

    #[test]
    fn semidefinite_hessian_takes_the_ridge_and_stays_accurate() {
        // min (x1 - x2 - 1)^2 s.t. x1 <= 0, -x2 <= 0; optimum (0,0) with
        // both constraints active at multiplier 2.
        let mut qp = Qp::new(
            DMatrix::from_row_slice(2, 2, &[2.0, -2.0, -2.0, 2.0]),
            DVector::from_row_slice(&[-2.0, 2.0]),
        );
        qp.a_in = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        qp.b_in = DVector::from_row_slice(&[0.0, 0.0]);
        let sol = solve_qp(&qp).unwrap();
        assert!(sol.regularized);
        assert!(sol.x.amax() < 1e-8);
        assert!(kkt_residuals(&qp, &sol).max_residual() < 1e-8);
    }

    #[test]
    fn linear_descent_is_reported_unbounded() {
        let qp = Qp::new(DMatrix::zeros(2, 2), DVector::from_row_slice(&[-1.0, 0.0]));
        assert!(matches!(solve_qp(&qp), Err(Error::Unbounded(_))));
    }

    #[test]
    fn asymmetric_hessian_is_rejected() {
        let qp = Qp::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]),
            DVector::zeros(2),
        );
        assert!(matches!(solve_qp(&qp), Err(Error::Domain(_))));
    }

    #[test]
    fn enumeration_oracle_agrees_on_handmade_cases() {
        for qp in [qp_1d_clamped(), {
            let mut qp = Qp::new(DMatrix::identity(2, 2) * 2.0, DVector::zeros(2));
            qp.a_eq = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
            qp.b_eq = DVector::from_row_slice(&[2.0]);
            qp.a_in = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
            qp.b_in = DVector::from_row_slice(&[0.25]);
            qp
        }] {
            let fast = solve_qp(&qp).unwrap();
            let slow = solve_qp_by_enumeration(&qp).unwrap();
            assert_relative_eq!(fast.objective, slow.objective, epsilon = 1e-10);
            assert!((&fast.x - &slow.x).amax() < 1e-8);
        }
    }

    #[test]
    fn equality_determined_point_checks_inequalities() {
        // Two independent equalities in 2-D pin x = (1, 1).
        let mut qp = Qp::new(DMatrix::identity(2, 2), DVector::zeros(2));
        qp.a_eq = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        qp.b_eq = DVector::from_row_slice(&[1.0, 1.0]);
        qp.a_in = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        qp.b_in = DVector::from_row_slice(&[3.0]);
        let sol = solve_qp(&qp).unwrap();
        assert_relative_eq!(sol.x[0], 1.0, epsilon = 1e-12);
        assert!(kkt_residuals(&qp, &sol).max_residual() < 1e-9);

        qp.b_in[0] = 1.0; // now x1 + x2 <= 1 conflicts with the equalities
        assert!(matches!(solve_qp(&qp), Err(Error::QpInfeasible(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn random_instances_match_the_oracle(seed in 1u64..10_000) {
            let mut rng = crate::rng::Rng::new(seed);
            let n = 1 + rng.below(3);
            let m = rng.below(5);
            let n_eq = if n > 1 && rng.uniform01() < 0.3 { 1 } else { 0 };
            let qp = random_strictly_convex_qp(&mut rng, n, m, n_eq);
            let fast = solve_qp(&qp).unwrap();
            let slow = solve_qp_by_enumeration(&qp).unwrap();
            prop_assert!(
                (fast.objective - slow.objective).abs() <= 1e-8 * (1.0 + slow.objective.abs()),
                "objective gap {} vs {}", fast.objective, slow.objective
            );
            prop_assert!(kkt_residuals(&qp, &fast).max_residual() < 1e-8);
        }
    }
}
