//! Middle-layer trajectory planning over linear reduced-order models.
//!
//! Two planners live here. `plan_tube_trajectory` is a receding-horizon QP:
//! from the current reduced state it plans N steps of a linear model,
//! penalizing movement and input effort, while keeping planned positions
//! inside a tube around a waypoint schedule and inside a tightened workspace
//! box. `HankelPredictor` is the data-driven alternative: it predicts N
//! future outputs from a window of past inputs/outputs and a candidate input
//! sequence, with the predictor matrix identified directly from one recorded
//! trajectory instead of a model.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::qp::{solve_qp, Qp};

/// Linear reduced-order model y(k+1) = a y(k) + b v(k). The first `pos_dims`
/// state coordinates are positions; tube and box constraints apply to them.
#[derive(Debug, Clone)]
pub struct RomSpec {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub pos_dims: usize,
}

impl RomSpec {
    /// Decoupled single integrators: y(k+1) = y(k) + tau v(k).
    pub fn single_integrator(tau: f64, dims: usize) -> Self {
        RomSpec {
            a: DMatrix::identity(dims, dims),
            b: DMatrix::identity(dims, dims) * tau,
            pos_dims: dims,
        }
    }

    /// Planar double integrator in (pos, vel) coordinates.
    pub fn double_integrator(tau: f64) -> Self {
        let (a, b) = crate::dynamics::rom_discretize(tau);
        RomSpec { a, b, pos_dims: 2 }
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    fn validate(&self) -> Result<()> {
        let s = self.a.nrows();
        if self.a.ncols() != s || self.b.nrows() != s {
            return Err(Error::Domain("model matrices have mismatched shapes".into()));
        }
        if self.pos_dims == 0 || self.pos_dims > s {
            return Err(Error::Domain(format!(
                "pos_dims {} incompatible with state dimension {s}",
                self.pos_dims
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TubePlannerSpec {
    pub rom: RomSpec,
    /// Prediction horizon N (plan steps).
    pub horizon: usize,
    /// Half-width of the position tube around the active waypoint.
    pub tube_half_width: f64,
    /// Positions must also satisfy |y_d| <= box_bound.
    pub box_bound: f64,
}

impl TubePlannerSpec {
    fn validate(&self) -> Result<()> {
        self.rom.validate()?;
        if self.horizon == 0 {
            return Err(Error::config("planner.horizon", "must be at least 1"));
        }
        if self.tube_half_width <= 0.0 || self.tube_half_width.is_nan() {
            return Err(Error::config("planner.tube_half_width", "must be positive"));
        }
        if self.box_bound <= 0.0 || self.box_bound.is_nan() {
            return Err(Error::config("planner.box_bound", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PlannedTrajectory {
    /// Planned states y(0..=N); states[0] is the anchor.
    pub states: Vec<DVector<f64>>,
    /// Planned inputs v(0..N).
    pub inputs: Vec<DVector<f64>>,
    /// Movement-plus-effort cost actually achieved (nonnegative).
    pub objective: f64,
    /// True when the QP needed Hessian regularization (it should not; the
    /// equality elimination leaves a positive definite reduced cost).
    pub regularized: bool,
}

/// Repeat each cell centroid `delta` times: entry g of the result is the
/// waypoint in force at global plan step g.
pub fn expand_waypoints(centroids: &[(f64, f64)], delta: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(centroids.len() * delta.max(1));
    for &c in centroids {
        for _ in 0..delta.max(1) {
            out.push(c);
        }
    }
    out
}

fn waypoint_at(schedule: &[(f64, f64)], g: usize) -> (f64, f64) {
    schedule[g.min(schedule.len() - 1)]
}

/// Receding-horizon plan from `y_now` at global plan step `k_now`.
///
/// ```text
/// minimize   sum_i ||y(i+1) - y(i)||^2 + ||v(i)||^2
/// subject to y(i+1) = A y(i) + B v(i),  y(0) = y_now,
///            |y_d(i) - wp_d(k_now + i)| <= tube_half_width   (i >= 1, d < pos_dims)
///            |y_d(i)| <= box_bound                           (i >= 1, d < pos_dims)
/// ```
///
/// The anchored state is exempt from the tube and box rows: it is whatever
/// the plant currently measures, and constraining it would make every
/// re-solve infeasible the moment tracking error exceeds the tightening.
pub fn plan_tube_trajectory(
    spec: &TubePlannerSpec,
    y_now: &DVector<f64>,
    k_now: usize,
    schedule: &[(f64, f64)],
) -> Result<PlannedTrajectory> {
    spec.validate()?;
    if schedule.is_empty() {
        return Err(Error::Domain("empty waypoint schedule".into()));
    }
    let s = spec.rom.state_dim();
    let p = spec.rom.input_dim();
    if y_now.len() != s {
        return Err(Error::Domain(format!(
            "anchor state has dimension {}, model expects {s}",
            y_now.len()
        )));
    }
    if spec.rom.pos_dims < 2 && spec.rom.pos_dims != 1 {
        return Err(Error::Domain("pos_dims must be at least 1".into()));
    }
    let n = spec.horizon;
    let nv = n * s + n * p; // y(1..=N) then v(0..N)
    let yi = |i: usize| (i - 1) * s; // variable offset of y(i), i >= 1
    let vi = |i: usize| n * s + i * p;

    let mut h = DMatrix::zeros(nv, nv);
    let mut f = DVector::zeros(nv);
    // Movement cost: ||y(1) - y(0)||^2 has the constant anchor inside.
    for d in 0..s {
        h[(yi(1) + d, yi(1) + d)] += 2.0;
        f[yi(1) + d] += -2.0 * y_now[d];
    }
    for i in 1..n {
        for d in 0..s {
            h[(yi(i) + d, yi(i) + d)] += 2.0;
            h[(yi(i + 1) + d, yi(i + 1) + d)] += 2.0;
            h[(yi(i) + d, yi(i + 1) + d)] += -2.0;
            h[(yi(i + 1) + d, yi(i) + d)] += -2.0;
        }
    }
    for i in 0..n {
        for d in 0..p {
            h[(vi(i) + d, vi(i) + d)] += 2.0;
        }
    }

    // Dynamics equalities: y(i+1) - A y(i) - B v(i) = [i == 0] A y_now.
    let mut a_eq = DMatrix::zeros(n * s, nv);
    let mut b_eq = DVector::zeros(n * s);
    for i in 0..n {
        let row = i * s;
        for d in 0..s {
            a_eq[(row + d, yi(i + 1) + d)] = 1.0;
        }
        if i == 0 {
            let ay = &spec.rom.a * y_now;
            for d in 0..s {
                b_eq[row + d] = ay[d];
            }
        } else {
            for d in 0..s {
                for e in 0..s {
                    a_eq[(row + d, yi(i) + e)] = -spec.rom.a[(d, e)];
                }
            }
        }
        for d in 0..s {
            for e in 0..p {
                a_eq[(row + d, vi(i) + e)] = -spec.rom.b[(d, e)];
            }
        }
    }

    // Tube and box inequalities on predicted positions.
    let pd = spec.rom.pos_dims;
    let m = n * pd * 4;
    let mut a_in = DMatrix::zeros(m, nv);
    let mut b_in = DVector::zeros(m);
    let mut row = 0;
    for i in 1..=n {
        let wp = waypoint_at(schedule, k_now + i);
        let wpv = [wp.0, wp.1];
        for d in 0..pd {
            let col = yi(i) + d;
            let w = wpv[d.min(1)];
            a_in[(row, col)] = 1.0;
            b_in[row] = w + spec.tube_half_width;
            a_in[(row + 1, col)] = -1.0;
            b_in[row + 1] = -(w - spec.tube_half_width);
            a_in[(row + 2, col)] = 1.0;
            b_in[row + 2] = spec.box_bound;
            a_in[(row + 3, col)] = -1.0;
            b_in[row + 3] = spec.box_bound;
            row += 4;
        }
    }

    let qp = Qp {
        h,
        f,
        a_eq,
        b_eq,
        a_in,
        b_in,
    };
    let sol = solve_qp(&qp).map_err(|e| match e {
        Error::QpInfeasible(msg) => Error::PlannerInfeasible {
            step: k_now,
            message: msg,
        },
        other => other,
    })?;

    let mut states = Vec::with_capacity(n + 1);
    states.push(y_now.clone());
    for i in 1..=n {
        states.push(DVector::from_fn(s, |d, _| sol.x[yi(i) + d]));
    }
    let inputs = (0..n)
        .map(|i| DVector::from_fn(p, |d, _| sol.x[vi(i) + d]))
        .collect();
    Ok(PlannedTrajectory {
        states,
        inputs,
        objective: sol.objective + y_now.norm_squared(),
        regularized: sol.regularized,
    })
}

/// Worst violation of the plan against the raw problem statement: dynamics
/// residuals, tube rows, and box rows (anchored state exempt, as planned).
/// Negative values mean slack everywhere.
pub fn audit_plan(
    spec: &TubePlannerSpec,
    plan: &PlannedTrajectory,
    k_now: usize,
    schedule: &[(f64, f64)],
) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    let n = spec.horizon;
    for i in 0..n {
        let pred = &spec.rom.a * &plan.states[i] + &spec.rom.b * &plan.inputs[i];
        worst = worst.max((&plan.states[i + 1] - pred).amax());
    }
    let pd = spec.rom.pos_dims;
    for i in 1..=n {
        let wp = waypoint_at(schedule, k_now + i);
        let wpv = [wp.0, wp.1];
        for d in 0..pd {
            let y = plan.states[i][d];
            worst = worst.max((y - wpv[d.min(1)]).abs() - spec.tube_half_width);
            worst = worst.max(y.abs() - spec.box_bound);
        }
    }
    worst
}

/// Data-driven multi-step predictor identified from one recorded trajectory.
///
/// A window is (v_ini, y_ini, v_future) -> y_future with `t_ini` past pairs
/// and `horizon` future steps. All windows of the training record are stacked
/// as columns; the predictor is the minimum-norm linear map reproducing them,
/// computed through the pseudo-inverse. For data from a linear system under
/// sufficiently rich input, every trajectory window the system can produce
/// lies in the training span, so prediction is exact up to roundoff.
#[derive(Debug, Clone)]
pub struct HankelPredictor {
    g: DMatrix<f64>,
    t_ini: usize,
    horizon: usize,
    p: usize,
    s: usize,
}

pub fn fit_hankel_predictor(
    inputs: &[DVector<f64>],
    outputs: &[DVector<f64>],
    t_ini: usize,
    horizon: usize,
) -> Result<HankelPredictor> {
    if inputs.len() != outputs.len() {
        return Err(Error::Domain("input and output records differ in length".into()));
    }
    if t_ini == 0 || horizon == 0 {
        return Err(Error::config("hankel.t_ini", "window sizes must be positive"));
    }
    let depth = t_ini + horizon;
    let t = inputs.len();
    if t < depth + 1 {
        return Err(Error::Excitation(format!(
            "record of length {t} cannot fill windows of depth {depth}"
        )));
    }
    let p = inputs[0].len();
    let s = outputs[0].len();
    let cols = t - depth + 1;

    // Full-depth input Hankel must have independent rows, otherwise the
    // record does not exercise enough of the behavior to identify it.
    let u_full = DMatrix::from_fn(depth * p, cols, |r, c| inputs[c + r / p][r % p]);
    let svd = u_full.clone().svd(false, false);
    let rank = svd.rank(1e-10 * svd.singular_values.amax().max(1e-300));
    if rank < depth * p {
        return Err(Error::Excitation(format!(
            "input Hankel rank {rank} below required {}",
            depth * p
        )));
    }

    let z_rows = t_ini * p + t_ini * s + horizon * p;
    let z = DMatrix::from_fn(z_rows, cols, |r, c| {
        if r < t_ini * p {
            inputs[c + r / p][r % p]
        } else if r < t_ini * (p + s) {
            let rr = r - t_ini * p;
            outputs[c + rr / s][rr % s]
        } else {
            let rr = r - t_ini * (p + s);
            inputs[c + t_ini + rr / p][rr % p]
        }
    });
    let y_f = DMatrix::from_fn(horizon * s, cols, |r, c| outputs[c + t_ini + r / s][r % s]);

    let z_pinv = z
        .clone()
        .pseudo_inverse(1e-12 * z.amax().max(1e-300))
        .map_err(|e| Error::Singular(format!("pseudo-inverse: {e}")))?;
    let g = &y_f * z_pinv;

    let resid = (&g * &z - &y_f).amax();
    if resid > 1e-8 * (1.0 + y_f.amax()) {
        return Err(Error::Excitation(format!(
            "predictor fails to reproduce its training data, residual {resid:.3e}; \
             the record is inconsistent with a linear explanation at this depth"
        )));
    }
    Ok(HankelPredictor {
        g,
        t_ini,
        horizon,
        p,
        s,
    })
}

impl HankelPredictor {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Predict `horizon` outputs from the initial window and a future input
    /// sequence.
    pub fn predict(
        &self,
        v_ini: &[DVector<f64>],
        y_ini: &[DVector<f64>],
        v_future: &[DVector<f64>],
    ) -> Result<Vec<DVector<f64>>> {
        if v_ini.len() != self.t_ini || y_ini.len() != self.t_ini {
            return Err(Error::Domain(format!(
                "initial window must have {} samples",
                self.t_ini
            )));
        }
        if v_future.len() != self.horizon {
            return Err(Error::Domain(format!(
                "future input sequence must have {} samples",
                self.horizon
            )));
        }
        let mut z = DVector::zeros(self.t_ini * (self.p + self.s) + self.horizon * self.p);
        let mut at = 0;
        for v in v_ini {
            for d in 0..self.p {
                z[at] = v[d];
                at += 1;
            }
        }
        for y in y_ini {
            for d in 0..self.s {
                z[at] = y[d];
                at += 1;
            }
        }
        for v in v_future {
            for d in 0..self.p {
                z[at] = v[d];
                at += 1;
            }
        }
        let y = &self.g * z;
        Ok((0..self.horizon)
            .map(|i| DVector::from_fn(self.s, |d, _| y[i * self.s + d]))
            .collect())
    }
}
