//! Bottom-layer stability and safety filters.
//!
//! All filters share one shape: take a nominal command, keep it when it
//! already satisfies the relevant decrease or invariance condition, and
//! otherwise project it onto the constraint with minimal (possibly weighted)
//! effort. Stability conditions are Lyapunov decrease rows, safety
//! conditions are barrier rows; both are affine in the command, so each
//! filter is a small QP with a closed-form flavor that we still route
//! through the shared solver to inherit its multiplier bookkeeping.
//!
//! The barrier catalog covers the three shapes the experiments use: plain
//! distance to a sphere, an orientation-aware disk for the car (which
//! penalizes pointing at the obstacle, not just being near it), and a
//! headway gap for the cruise-control example.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{DubinsInput, DubinsState};
use crate::error::{Error, Result};
use crate::linalg::solve_lls;
use crate::qp::{solve_qp, Qp};

/// Minimally modify `u_nom` so the Lyapunov derivative row satisfies
/// lf + lg . u <= -lambda v. Infeasible only when lg vanishes while the
/// decrease is still missing.
pub fn clf_qp(
    u_nom: &DVector<f64>,
    lf: f64,
    lg: &DVector<f64>,
    v: f64,
    lambda: f64,
) -> Result<DVector<f64>> {
    if lambda <= 0.0 {
        return Err(Error::Domain("decrease rate lambda must be positive".into()));
    }
    let n = u_nom.len();
    let mut qp = Qp::new(DMatrix::identity(n, n) * 2.0, u_nom * -2.0);
    qp.a_in = DMatrix::from_fn(1, n, |_, j| lg[j]);
    qp.b_in = DVector::from_row_slice(&[-lambda * v - lf]);
    match solve_qp(&qp) {
        Ok(sol) => Ok(sol.x),
        Err(Error::QpInfeasible(m)) => Err(Error::ClfInfeasible(m)),
        Err(e) => Err(e),
    }
}

/// Minimally modify `v_des` in the Gamma-weighted norm so the barrier
/// derivative row satisfies lf + lg . v >= -alpha h. Pass `None` for the
/// unweighted filter.
pub fn cbf_qp(
    v_des: &DVector<f64>,
    lf: f64,
    lg: &DVector<f64>,
    h: f64,
    alpha: f64,
    gamma: Option<&DMatrix<f64>>,
) -> Result<DVector<f64>> {
    if alpha <= 0.0 {
        return Err(Error::Domain("barrier rate alpha must be positive".into()));
    }
    let n = v_des.len();
    let g = match gamma {
        Some(g) => {
            if g.shape() != (n, n) {
                return Err(Error::Domain("weight matrix shape mismatch".into()));
            }
            g.clone()
        }
        None => DMatrix::identity(n, n),
    };
    let mut qp = Qp::new(&g * 2.0, -2.0 * (&g * v_des));
    qp.a_in = DMatrix::from_fn(1, n, |_, j| -lg[j]);
    qp.b_in = DVector::from_row_slice(&[alpha * h + lf]);
    match solve_qp(&qp) {
        Ok(sol) => Ok(sol.x),
        Err(Error::QpInfeasible(m)) => Err(Error::CbfInfeasible(m)),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone)]
pub struct SoftFilterResult {
    pub u: DVector<f64>,
    /// Slack spent on the stability row; zero when both rows are compatible.
    pub delta: f64,
}

/// Combined filter with a soft stability row and a hard safety row:
///
/// ```text
/// min ||u - u_nom||^2 + penalty * delta^2
/// s.t. lf_v + lg_v . u <= -lambda v + delta     (soft)
///      lf_h + lg_h . u >= -alpha h              (hard)
/// ```
///
/// Safety can always veto stability; the slack reports how much it did.
#[allow(clippy::too_many_arguments)]
pub fn clf_cbf_qp(
    u_nom: &DVector<f64>,
    lf_v: f64,
    lg_v: &DVector<f64>,
    v: f64,
    lambda: f64,
    lf_h: f64,
    lg_h: &DVector<f64>,
    h: f64,
    alpha: f64,
    penalty: f64,
) -> Result<SoftFilterResult> {
    if penalty <= 0.0 {
        return Err(Error::Domain("slack penalty must be positive".into()));
    }
    if lambda <= 0.0 || alpha <= 0.0 {
        return Err(Error::Domain("rates lambda and alpha must be positive".into()));
    }
    let n = u_nom.len();
    // Variables (u, delta).
    let mut h_mat = DMatrix::identity(n + 1, n + 1) * 2.0;
    h_mat[(n, n)] = 2.0 * penalty;
    let mut f = DVector::zeros(n + 1);
    for i in 0..n {
        f[i] = -2.0 * u_nom[i];
    }
    let mut qp = Qp::new(h_mat, f);
    let mut a_in = DMatrix::zeros(2, n + 1);
    for j in 0..n {
        a_in[(0, j)] = lg_v[j];
        a_in[(1, j)] = -lg_h[j];
    }
    a_in[(0, n)] = -1.0;
    let b_in = DVector::from_row_slice(&[-lambda * v - lf_v, alpha * h + lf_h]);
    qp.a_in = a_in;
    qp.b_in = b_in;
    match solve_qp(&qp) {
        Ok(sol) => Ok(SoftFilterResult {
            u: DVector::from_fn(n, |i, _| sol.x[i]),
            delta: sol.x[n],
        }),
        Err(Error::QpInfeasible(m)) => Err(Error::CbfInfeasible(m)),
        Err(e) => Err(e),
    }
}

/// Distance-to-sphere barrier: h(q) = ||q - center|| - radius, safe outside.
#[derive(Debug, Clone)]
pub struct SphereBarrier {
    pub center: DVector<f64>,
    pub radius: f64,
}

impl SphereBarrier {
    pub fn h(&self, q: &DVector<f64>) -> f64 {
        (q - &self.center).norm() - self.radius
    }

    /// Gradient (q - c)/||q - c||; undefined at the center.
    pub fn grad(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        let d = q - &self.center;
        let n = d.norm();
        if n < 1e-12 {
            return Err(Error::Domain(
                "barrier gradient undefined at the sphere center".into(),
            ));
        }
        Ok(d / n)
    }
}

/// Orientation-aware obstacle for the car: h = d0 - radius - kappa
/// cos(theta - theta0), where d0 is the planar distance to the obstacle
/// center and theta0 the bearing toward it. Heading straight at the obstacle
/// costs an extra kappa of clearance; heading away refunds it.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct DubinsObstacle {
    pub center: (f64, f64),
    pub radius: f64,
    pub kappa: f64,
}

impl DubinsObstacle {
    fn geometry(&self, x: &DubinsState) -> Result<(f64, f64)> {
        let dx = x.x1 - self.center.0;
        let dy = x.x2 - self.center.1;
        let d0 = (dx * dx + dy * dy).sqrt();
        if d0 < 1e-12 {
            return Err(Error::Domain(
                "barrier undefined at the obstacle center".into(),
            ));
        }
        let theta0 = (self.center.1 - x.x2).atan2(self.center.0 - x.x1);
        Ok((d0, theta0))
    }

    pub fn h(&self, x: &DubinsState) -> Result<f64> {
        let (d0, theta0) = self.geometry(x)?;
        Ok(d0 - self.radius - self.kappa * (x.theta - theta0).cos())
    }

    /// Row r with hdot = r . (u1, u2) along the car dynamics. The car is
    /// driftless, so there is no input-independent term.
    pub fn input_row(&self, x: &DubinsState) -> Result<DVector<f64>> {
        let (d0, theta0) = self.geometry(x)?;
        let s = (x.theta - theta0).sin();
        let dx = x.x1 - self.center.0;
        let dy = x.x2 - self.center.1;
        // Bearing changes with position: d theta0 / d x = (-dy, dx)/d0^2
        // written in obstacle-relative coordinates.
        let dh_dx1 = dx / d0 - self.kappa * s * (self.center.1 - x.x2) / (d0 * d0);
        let dh_dx2 = dy / d0 + self.kappa * s * (self.center.0 - x.x1) / (d0 * d0);
        Ok(DVector::from_row_slice(&[
            dh_dx1 * x.theta.cos() + dh_dx2 * x.theta.sin(),
            self.kappa * s,
        ]))
    }
}

/// Gamma-weighted safety filter for the car around one obstacle. Returns the
/// filtered input and the barrier value for logging.
pub fn dubins_obstacle_filter(
    u_des: &DubinsInput,
    x: &DubinsState,
    obs: &DubinsObstacle,
    alpha: f64,
    gamma: &DMatrix<f64>,
) -> Result<(DubinsInput, f64)> {
    let h = obs.h(x)?;
    let row = obs.input_row(x)?;
    let des = DVector::from_row_slice(&[u_des.speed, u_des.turn_rate]);
    let v = cbf_qp(&des, 0.0, &row, h, alpha, Some(gamma))?;
    Ok((
        DubinsInput {
            speed: v[0],
            turn_rate: v[1],
        },
        h,
    ))
}

/// Headway barrier for cruise control: h = gap - (a0 + a1 s + a2 l + a3 s^2 +
/// a4 s l + a5 l^2) with s the own speed and l the lead speed. The classic
/// fixed-time-headway rule is coeffs = [0, t_headway, 0, 0, 0, 0].
#[derive(Debug, Clone)]
pub struct HeadwayBarrier {
    pub coeffs: [f64; 6],
}

impl HeadwayBarrier {
    pub fn fixed_time(t_headway: f64) -> Self {
        HeadwayBarrier {
            coeffs: [0.0, t_headway, 0.0, 0.0, 0.0, 0.0],
        }
    }

    pub fn h(&self, gap: f64, speed: f64, lead: f64) -> f64 {
        let c = &self.coeffs;
        gap - (c[0]
            + c[1] * speed
            + c[2] * lead
            + c[3] * speed * speed
            + c[4] * speed * lead
            + c[5] * lead * lead)
    }

    /// d h / d speed at fixed gap and lead speed.
    pub fn dh_dspeed(&self, speed: f64, lead: f64) -> f64 {
        let c = &self.coeffs;
        -(c[1] + 2.0 * c[3] * speed + c[4] * lead)
    }
}

/// Input-to-state safety margin ||lg||^2 / eps(h) with eps(h) = eps0 e^{beta
/// h}. Growing eps with h means the filter buys margin where h is small and
/// relaxes far from the boundary.
pub fn issf_margin(lg_norm_sq: f64, h: f64, eps0: f64, beta: f64) -> Result<f64> {
    if eps0 <= 0.0 || !eps0.is_finite() {
        return Err(Error::SingularFragility(format!(
            "eps0 = {eps0} must be positive and finite"
        )));
    }
    if beta < 0.0 {
        return Err(Error::Domain(
            "beta must be nonnegative so the fragility weight grows with h".into(),
        ));
    }
    Ok(lg_norm_sq / (eps0 * (beta * h).exp()))
}

/// Barrier filter with the input-to-state safety margin folded into the row:
/// lf + lg . v >= -alpha h + ||lg||^2 / eps(h).
#[allow(clippy::too_many_arguments)]
pub fn issf_cbf_qp(
    v_des: &DVector<f64>,
    lf: f64,
    lg: &DVector<f64>,
    h: f64,
    alpha: f64,
    eps0: f64,
    beta: f64,
    gamma: Option<&DMatrix<f64>>,
) -> Result<DVector<f64>> {
    let margin = issf_margin(lg.norm_squared(), h, eps0, beta)?;
    cbf_qp(v_des, lf - margin, lg, h, alpha, gamma)
}

/// Margin certifying that a full-order tracker inherits reduced-order
/// safety: returns h - (k_h m_env / (lambda - alpha)) ||edot||, nonnegative
/// membership meaning the state is safe to track from. Requires the tracking
/// rate to beat the barrier rate, lambda > alpha.
pub fn tracking_safety_margin(
    h: f64,
    k_h: f64,
    m_env: f64,
    lambda: f64,
    alpha: f64,
    edot_norm: f64,
) -> Result<f64> {
    if lambda <= alpha {
        return Err(Error::Domain(format!(
            "tracking rate {lambda} must exceed barrier rate {alpha}"
        )));
    }
    Ok(h - k_h * m_env / (lambda - alpha) * edot_norm)
}

/// Fit an exponential envelope ||e(t)|| <= M e^{-lambda t} ||e(0)|| to
/// sampled norms: least squares on logs for the rate, then M inflated until
/// the envelope actually dominates every sample. Returns (M, lambda).
pub fn fit_exponential_envelope(ts: &[f64], norms: &[f64]) -> Result<(f64, f64)> {
    if ts.len() != norms.len() || ts.len() < 2 {
        return Err(Error::Domain(
            "envelope fit needs at least two (t, norm) samples".into(),
        ));
    }
    let usable: Vec<(f64, f64)> = ts
        .iter()
        .zip(norms)
        .filter(|&(_, &n)| n > 1e-300)
        .map(|(&t, &n)| (t, n))
        .collect();
    if usable.len() < 2 {
        return Err(Error::Domain("all samples are zero; no envelope".into()));
    }
    let a = DMatrix::from_fn(usable.len(), 2, |i, j| if j == 0 { 1.0 } else { -usable[i].0 });
    let b = DVector::from_fn(usable.len(), |i, _| usable[i].1.ln());
    let coef = solve_lls(&a, &b)?;
    let lambda = coef[1];
    let n0 = usable[0].1;
    let mut m_env = 0.0f64;
    for &(t, n) in &usable {
        m_env = m_env.max(n / (n0 * (-lambda * t).exp()));
    }
    Ok((m_env, lambda))
}
