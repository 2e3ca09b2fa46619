//! Bi-criterion least squares through the sweet-spot lens.
//!
//! Two quadratic criteria compete for one decision vector. Weighted sweeps
//! trace the Pareto curve, bisection finds the minimax point, and the
//! sub-optimality measure sigma says how far that point sits from beating
//! every other Pareto point in every criterion at once. When the two
//! regressors share their first `k` rows, sigma has a closed form,
//! `||shared part of (b1 - b2)||^2 / 4`, certified here by an explicit dual
//! point. A finite-horizon LQR curve provides the control-flavored instance
//! of the same trade-off.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Two least-squares criteria `||A_i x - b_i||^2` whose regressors agree in
/// their first `k` rows.
#[derive(Debug, Clone)]
pub struct BiCriterionLs {
    pub a1: DMatrix<f64>,
    pub a2: DMatrix<f64>,
    pub b1: DVector<f64>,
    pub b2: DVector<f64>,
    /// Number of leading rows shared by `a1` and `a2`, exactly.
    pub k: usize,
}

impl BiCriterionLs {
    pub fn new(
        a1: DMatrix<f64>,
        a2: DMatrix<f64>,
        b1: DVector<f64>,
        b2: DVector<f64>,
        k: usize,
    ) -> Result<Self> {
        let p = BiCriterionLs { a1, a2, b1, b2, k };
        p.validate()?;
        Ok(p)
    }

    /// Re-checks the type invariants; operations whose math leans on them
    /// (the closed form, the dual certificate) call this rather than
    /// trusting the fields.
    pub fn validate(&self) -> Result<()> {
        let (m, n) = self.a1.shape();
        if m == 0 || self.a2.shape() != (m, n) || self.b1.len() != m || self.b2.len() != m {
            return Err(Error::Domain(format!(
                "criteria must share dimensions, got {}x{} / {}x{} with b of {} / {}",
                m,
                n,
                self.a2.nrows(),
                self.a2.ncols(),
                self.b1.len(),
                self.b2.len()
            )));
        }
        if self.k > m {
            return Err(Error::Domain(format!("k = {} exceeds m = {m}", self.k)));
        }
        let all_finite = self.a1.iter().all(|v| v.is_finite())
            && self.a2.iter().all(|v| v.is_finite())
            && self.b1.iter().all(|v| v.is_finite())
            && self.b2.iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Domain("non-finite entry in problem data".into()));
        }
        // The closed form needs the shared rows shared exactly, not nearly.
        for r in 0..self.k {
            for c in 0..n {
                if self.a1[(r, c)] != self.a2[(r, c)] {
                    return Err(Error::Domain(format!(
                        "row {r} differs between the regressors but k = {}",
                        self.k
                    )));
                }
            }
        }
        for (name, a) in [("first", &self.a1), ("second", &self.a2)] {
            let sv = a.clone().svd(false, false).singular_values;
            if sv[sv.len() - 1] <= 1e-10 * sv[0] {
                return Err(Error::Domain(format!(
                    "{name} regressor is not full row rank"
                )));
            }
        }
        Ok(())
    }

    /// The pair (C1, C2) at `x`.
    pub fn costs(&self, x: &DVector<f64>) -> (f64, f64) {
        (
            (&self.a1 * x - &self.b1).norm_squared(),
            (&self.a2 * x - &self.b2).norm_squared(),
        )
    }
}

/// Weighted-sum scalarization results over a grid of weights on the first
/// criterion (the second gets the complement).
#[derive(Debug, Clone)]
pub struct ParetoSweep {
    pub weights: Vec<f64>,
    pub costs: Vec<(f64, f64)>,
    pub solutions: Vec<DVector<f64>>,
}

#[derive(Debug, Clone)]
pub struct MinimaxPoint {
    pub x: DVector<f64>,
    pub costs: (f64, f64),
    /// True when the two criteria were equalized by an interior weight; false
    /// when the optimum sits at a weight-grid endpoint (one criterion
    /// dominates the max everywhere).
    pub equalized: bool,
}

/// Dual optimum of the minimax problem, used to certify sigma.
#[derive(Debug, Clone)]
pub struct DualCertificate {
    pub mu1: DVector<f64>,
    pub mu2: DVector<f64>,
    pub lambda: (f64, f64),
    pub dual_value: f64,
    /// |primal minimax value - dual value|.
    pub gap: f64,
}

/// Log-spaced weight grid: the odds ratio lambda1/(1 - lambda1) runs over
/// [1e-4, 1e4], which brackets each criterion's near-exclusive regime. This
/// grid plus the full-row-rank reduction is the definition of the empirical
/// sigma estimator.
pub fn weight_grid(count: usize) -> Vec<f64> {
    assert!(count >= 2);
    let (lo, hi) = (1e-4f64.ln(), 1e4f64.ln());
    (0..count)
        .map(|i| {
            let r = (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp();
            r / (1.0 + r)
        })
        .collect()
}

/// Solves the lambda1-weighted sum of the two criteria. The stacked weighted
/// regressor loses row rank whenever rows are shared, but both criteria are
/// constant across that solution set, so any minimizer does; this one is
/// minimum-norm up to the ridge. The singularity error is reserved for
/// unusable weights.
///
/// The solve goes through ridge-regularized normal equations rather than an
/// SVD pseudo-inverse: the bidiagonal-QR SVD loses about 1e-3 of residual
/// accuracy on these deliberately rank-deficient stacks near the equalizing
/// weight (clustered singular values), which is enough to scramble the
/// minimax bisection. A 1e-10 ridge plus one refinement step keeps the
/// costs accurate to ~1e-12; the refinement residual lies in the Gram
/// matrix's range, so the flat directions stay at the ridge's minimum-norm
/// pick.
fn scalarized_solution(p: &BiCriterionLs, lambda1: f64) -> Result<DVector<f64>> {
    if !lambda1.is_finite() || lambda1 <= 0.0 || lambda1 >= 1.0 {
        return Err(Error::Singular(format!(
            "scalarization weight {lambda1} outside (0, 1)"
        )));
    }
    let n = p.a1.ncols();
    let l2 = 1.0 - lambda1;
    let h = lambda1 * (p.a1.transpose() * &p.a1) + l2 * (p.a2.transpose() * &p.a2);
    let g = lambda1 * (p.a1.transpose() * &p.b1) + l2 * (p.a2.transpose() * &p.b2);
    let ridge = 1e-10 * h.diagonal().amax().max(1e-300);
    let chol = (&h + ridge * DMatrix::identity(n, n))
        .cholesky()
        .ok_or_else(|| Error::Singular("scalarized Gram matrix".into()))?;
    let mut x = chol.solve(&g);
    let residual = &g - &h * &x;
    x += chol.solve(&residual);
    Ok(x)
}

pub fn pareto_sweep(p: &BiCriterionLs, weights: &[f64]) -> Result<ParetoSweep> {
    let mut costs = Vec::with_capacity(weights.len());
    let mut solutions = Vec::with_capacity(weights.len());
    for &w in weights {
        let x = scalarized_solution(p, w)?;
        costs.push(p.costs(&x));
        solutions.push(x);
    }
    Ok(ParetoSweep {
        weights: weights.to_vec(),
        costs,
        solutions,
    })
}

/// Minimizes the larger of the two criteria. Raising the first criterion's
/// weight can only lower C1 and raise C2, so C1 - C2 crosses zero at most
/// once; bisection on that gap finds the equalizing weight. When no crossing
/// exists in (0, 1), one criterion's cost dominates the max for every weight
/// and the optimum is the corresponding endpoint limit.
pub fn minimax_point(p: &BiCriterionLs) -> Result<MinimaxPoint> {
    p.validate()?;
    let at = |l1: f64| -> Result<(DVector<f64>, (f64, f64))> {
        let x = scalarized_solution(p, l1)?;
        let c = p.costs(&x);
        Ok((x, c))
    };
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
    let (x_lo, c_lo) = at(lo)?;
    if c_lo.0 - c_lo.1 <= 0.0 {
        // C1 never exceeds C2: the max is C2, smallest where its weight rules.
        return Ok(MinimaxPoint {
            x: x_lo,
            costs: c_lo,
            equalized: false,
        });
    }
    let (x_hi, c_hi) = at(hi)?;
    if c_hi.0 - c_hi.1 >= 0.0 {
        return Ok(MinimaxPoint {
            x: x_hi,
            costs: c_hi,
            equalized: false,
        });
    }
    // 60 halvings of the unit interval put the weight within 1e-18.
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let (_, c) = at(mid)?;
        if c.0 - c.1 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (x, costs) = at(0.5 * (lo + hi))?;
    let equalized = (costs.0 - costs.1).abs() <= 1e-9 * (1.0 + costs.0.max(costs.1));
    Ok(MinimaxPoint { x, costs, equalized })
}

/// The biggest loss in optimality of the minimax point against any sweep
/// point, in either criterion. With full-row-rank regressors the sweep's
/// extreme weights drive each criterion toward zero, so this approaches
/// max(C1, C2) at the minimax point.
pub fn sigma_empirical(sweep: &ParetoSweep, mm: &MinimaxPoint) -> f64 {
    assert!(!sweep.costs.is_empty(), "sweep must be nonempty");
    let mut worst = f64::NEG_INFINITY;
    for &(c1, c2) in &sweep.costs {
        worst = worst.max(mm.costs.0 - c1).max(mm.costs.1 - c2);
    }
    worst
}

/// Exact sigma when the regressors share their first `k` rows: one quarter of
/// the squared norm of (b1 - b2) restricted to those rows.
pub fn sigma_closed_form(p: &BiCriterionLs) -> Result<f64> {
    p.validate()?;
    let mut s = 0.0;
    for i in 0..p.k {
        let d = p.b1[i] - p.b2[i];
        s += d * d;
    }
    Ok(0.25 * s)
}

/// Builds the known dual optimum (mu supported on the shared rows, equal
/// weights), checks its feasibility, and certifies the duality gap against
/// the primal minimax value.
pub fn dual_certificate(p: &BiCriterionLs) -> Result<DualCertificate> {
    p.validate()?;
    let m = p.b1.len();
    let mut mu = DVector::zeros(m);
    for i in 0..p.k {
        mu[i] = (p.b1[i] - p.b2[i]) / 4.0;
    }
    // Shared leading rows make the two pullbacks agree by construction, but a
    // certificate that leans on its own construction certifies nothing.
    let residual = (p.a1.transpose() * &mu - p.a2.transpose() * &mu).amax();
    if residual > 1e-8 {
        return Err(Error::CertificateInvalid(format!(
            "dual feasibility residual {residual:.3e}"
        )));
    }
    let diff = &p.b1 - &p.b2;
    let dual_value = 2.0 * mu.dot(&diff) - 4.0 * mu.norm_squared();
    let mm = minimax_point(p)?;
    let primal = mm.costs.0.max(mm.costs.1);
    let gap = (primal - dual_value).abs();
    if gap > 1e-6 {
        return Err(Error::CertificateInvalid(format!(
            "duality gap {gap:.3e} exceeds 1e-6"
        )));
    }
    Ok(DualCertificate {
        mu1: mu.clone(),
        mu2: mu,
        lambda: (0.5, 0.5),
        dual_value,
        gap,
    })
}

/// Random shared-row instance: m rows, 2m columns, standard-normal entries,
/// the first `k` rows of the second regressor duplicated from the first,
/// b2 = b1 + an offset with standard deviation 10 per entry.
///
/// All parts are drawn in a fixed order before `k` is applied, so a seed
/// determines one master draw and `k` only selects how much of it is shared;
/// sweeping `k` at a fixed seed varies diversity on otherwise identical data.
/// Draws whose distinct rows stack to a condition number above 1e8 are
/// rejected and redrawn.
pub fn generate_paper_instance(seed: u64, m: usize, k: usize) -> Result<BiCriterionLs> {
    if m == 0 || k > m {
        return Err(Error::Domain(format!("need m >= 1 and k <= m, got m={m} k={k}")));
    }
    let n = 2 * m;
    let mut rng = Rng::new(seed);
    fn draw_matrix(rng: &mut Rng, rows: usize, cols: usize) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                a[(r, c)] = rng.normal();
            }
        }
        a
    }
    for _ in 0..100 {
        let a1 = draw_matrix(&mut rng, m, n);
        let mut a2 = draw_matrix(&mut rng, m, n);
        let mut b1 = DVector::zeros(m);
        for i in 0..m {
            b1[i] = rng.normal();
        }
        let mut delta = DVector::zeros(m);
        for i in 0..m {
            delta[i] = 10.0 * rng.normal();
        }
        for r in 0..k {
            for c in 0..n {
                a2[(r, c)] = a1[(r, c)];
            }
        }
        let b2 = &b1 + delta;
        // Stack each matrix's own rows once and the unshared remainder of the
        // other: with k shared rows the full stack is singular by fiat, so
        // conditioning is meaningful only on the distinct rows.
        let distinct_rows = 2 * m - k;
        let mut distinct = DMatrix::zeros(distinct_rows, n);
        for r in 0..m {
            for c in 0..n {
                distinct[(r, c)] = a1[(r, c)];
            }
        }
        for r in k..m {
            for c in 0..n {
                distinct[(m + r - k, c)] = a2[(r, c)];
            }
        }
        let sv = distinct.svd(false, false).singular_values;
        if sv[sv.len() - 1] <= 0.0 || sv[0] / sv[sv.len() - 1] > 1e8 {
            continue;
        }
        return BiCriterionLs::new(a1, a2, b1, b2, k);
    }
    Err(Error::IterationLimit("shared-row instance generation".into()))
}

/// One point of the LQR state-cost/control-cost trade-off curve.
#[derive(Debug, Clone, Copy)]
pub struct LqrParetoPoint {
    pub rho: f64,
    pub state_cost: f64,
    pub control_cost: f64,
}

/// Traces the LQR Pareto curve by sweeping the control weight rho in the
/// scalarized cost sum ||x(t)||^2 + rho ||u(t)||^2 + ||x(N)||^2: backward
/// Riccati recursion for the gains, a forward rollout from `x0` for the
/// achieved cost pair.
pub fn lqr_pareto(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    x0: &DVector<f64>,
    horizon: usize,
    rho_grid: &[f64],
) -> Result<Vec<LqrParetoPoint>> {
    let nx = a.nrows();
    let nu = b.ncols();
    if a.ncols() != nx || b.nrows() != nx || x0.len() != nx || nx == 0 || nu == 0 {
        return Err(Error::Domain(format!(
            "inconsistent LQR dimensions: A {}x{}, B {}x{}, x0 {}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols(),
            x0.len()
        )));
    }
    if horizon == 0 {
        return Err(Error::Domain("LQR horizon must be at least 1".into()));
    }
    let mut curve = Vec::with_capacity(rho_grid.len());
    for &rho in rho_grid {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::Domain(format!("control weight {rho} must be positive")));
        }
        let mut p = DMatrix::identity(nx, nx);
        let mut gains = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let s = rho * DMatrix::identity(nu, nu) + b.transpose() * &p * b;
            let rhs = b.transpose() * &p * a;
            let k_t = s
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Singular("Riccati input-cost block".into()))?;
            p = DMatrix::identity(nx, nx) + a.transpose() * &p * (a - b * &k_t);
            gains.push(k_t);
        }
        gains.reverse();
        let mut x = x0.clone();
        let mut state_cost = 0.0;
        let mut control_cost = 0.0;
        for k_t in &gains {
            state_cost += x.norm_squared();
            let u = -(k_t * &x);
            control_cost += u.norm_squared();
            x = a * &x + b * &u;
        }
        state_cost += x.norm_squared();
        curve.push(LqrParetoPoint {
            rho,
            state_cost,
            control_cost,
        });
    }
    Ok(curve)
}
