//! Planar unicycle testbed and its flatness structure.
//!
//! The full-order model is the kinematic car
//!
//! ```text
//! x1' = u1 cos(theta),   x2' = u1 sin(theta),   theta' = u2
//! ```
//!
//! whose flat output is the position: given a twice-differentiable planar
//! curve xi(t), the state and input along it are recovered algebraically
//! from (xi, xi', xi''). The planners above work with the linear
//! reduced-order models exposed at the bottom: a position/velocity double
//! integrator in flat coordinates and its exact zero-order-hold
//! discretization.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Below this speed the heading and turn rate are no longer determined by
/// the flat output; the recovery maps refuse rather than extrapolate.
pub const MIN_FLAT_SPEED: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DubinsState {
    pub x1: f64,
    pub x2: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DubinsInput {
    pub speed: f64,
    pub turn_rate: f64,
}

pub fn dubins_deriv(x: &DubinsState, u: &DubinsInput) -> [f64; 3] {
    [
        u.speed * x.theta.cos(),
        u.speed * x.theta.sin(),
        u.turn_rate,
    ]
}

/// One classical RK4 step of the car with the input held constant.
pub fn dubins_rk4_step(x: &DubinsState, u: &DubinsInput, dt: f64) -> DubinsState {
    let f = |s: &DubinsState| dubins_deriv(s, u);
    let shift = |s: &DubinsState, k: &[f64; 3], h: f64| DubinsState {
        x1: s.x1 + h * k[0],
        x2: s.x2 + h * k[1],
        theta: s.theta + h * k[2],
    };
    let k1 = f(x);
    let k2 = f(&shift(x, &k1, dt / 2.0));
    let k3 = f(&shift(x, &k2, dt / 2.0));
    let k4 = f(&shift(x, &k3, dt));
    DubinsState {
        x1: x.x1 + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x2: x.x2 + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        theta: x.theta + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    }
}

/// Generic classical RK4 step for an autonomous vector field.
pub fn rk4_step(f: &dyn Fn(&DVector<f64>) -> DVector<f64>, x: &DVector<f64>, dt: f64) -> DVector<f64> {
    let k1 = f(x);
    let k2 = f(&(x + &k1 * (dt / 2.0)));
    let k3 = f(&(x + &k2 * (dt / 2.0)));
    let k4 = f(&(x + &k3 * dt));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Generic classical RK4 step for a time-varying vector field.
pub fn rk4_step_time(
    f: &dyn Fn(f64, &DVector<f64>) -> DVector<f64>,
    t: f64,
    x: &DVector<f64>,
    dt: f64,
) -> DVector<f64> {
    let k1 = f(t, x);
    let k2 = f(t + dt / 2.0, &(x + &k1 * (dt / 2.0)));
    let k3 = f(t + dt / 2.0, &(x + &k2 * (dt / 2.0)));
    let k4 = f(t + dt, &(x + &k3 * dt));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// A point on a flat trajectory: position, velocity, acceleration of the
/// planar output curve.
#[derive(Debug, Clone, Copy)]
pub struct FlatPoint {
    pub pos: [f64; 2],
    pub vel: [f64; 2],
    pub acc: [f64; 2],
}

impl FlatPoint {
    pub fn speed(&self) -> f64 {
        (self.vel[0] * self.vel[0] + self.vel[1] * self.vel[1]).sqrt()
    }
}

/// State along a flat trajectory: heading is the velocity direction.
pub fn flat_to_state(p: &FlatPoint) -> Result<DubinsState> {
    if p.speed() < MIN_FLAT_SPEED {
        return Err(Error::Domain(format!(
            "flat speed {:.3e} below {MIN_FLAT_SPEED:.0e}; heading undefined",
            p.speed()
        )));
    }
    Ok(DubinsState {
        x1: p.pos[0],
        x2: p.pos[1],
        theta: p.vel[1].atan2(p.vel[0]),
    })
}

/// Input along a flat trajectory: speed is the velocity norm, turn rate is
/// the curvature term (v x a) / |v|^2.
pub fn flat_to_input(p: &FlatPoint) -> Result<DubinsInput> {
    let s2 = p.vel[0] * p.vel[0] + p.vel[1] * p.vel[1];
    if s2.sqrt() < MIN_FLAT_SPEED {
        return Err(Error::Domain(format!(
            "flat speed {:.3e} below {MIN_FLAT_SPEED:.0e}; turn rate undefined",
            s2.sqrt()
        )));
    }
    Ok(DubinsInput {
        speed: s2.sqrt(),
        turn_rate: (p.vel[0] * p.acc[1] - p.vel[1] * p.acc[0]) / s2,
    })
}

/// Flat coordinates of a car state: position plus the velocity the current
/// input implies, z = (x1, x2, u1 cos(theta), u1 sin(theta)).
pub fn state_to_flat(x: &DubinsState, speed: f64) -> DVector<f64> {
    DVector::from_row_slice(&[
        x.x1,
        x.x2,
        speed * x.theta.cos(),
        speed * x.theta.sin(),
    ])
}

/// Continuous-time double integrator in flat coordinates,
/// z = (pos, vel), z' = A z + B a.
pub fn rom_continuous() -> (DMatrix<f64>, DMatrix<f64>) {
    let mut a = DMatrix::zeros(4, 4);
    a[(0, 2)] = 1.0;
    a[(1, 3)] = 1.0;
    let mut b = DMatrix::zeros(4, 2);
    b[(2, 0)] = 1.0;
    b[(3, 1)] = 1.0;
    (a, b)
}

/// Exact zero-order-hold discretization of the double integrator over tau:
/// A = [[I, tau I], [0, I]], B = [[tau^2/2 I], [tau I]]. Exact because the
/// continuous A is nilpotent of index 2.
pub fn rom_discretize(tau: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut a = DMatrix::identity(4, 4);
    a[(0, 2)] = tau;
    a[(1, 3)] = tau;
    let mut b = DMatrix::zeros(4, 2);
    b[(0, 0)] = tau * tau / 2.0;
    b[(1, 1)] = tau * tau / 2.0;
    b[(2, 0)] = tau;
    b[(3, 1)] = tau;
    (a, b)
}

/// One discrete step of the flat double integrator.
pub fn rom_step(z: &DVector<f64>, accel: &DVector<f64>, tau: f64) -> DVector<f64> {
    let (a, b) = rom_discretize(tau);
    &a * z + &b * accel
}
