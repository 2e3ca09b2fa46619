//! Robustness laws for a delayed scalar feedback loop.
//!
//! The loop gain is L(s) = P(s) C(s) e^{-tau s} with rational P, C and a pure
//! delay. An unstable plant pole p and unstable plant zero q put a floor
//! under every achievable closed loop: the fragility F = tau p +
//! ln|(p+q)/(p-q)| lower-bounds ln of the worst-case noise amplification
//! ||T||_inf, the Poisson-weighted log integral of |T| over frequency, and a
//! two-band waterbed combination of band peak and global peak. This module
//! evaluates S and T on the axis and in the right half plane, estimates the
//! H-infinity norm, computes the weighted integral by adaptive quadrature,
//! and checks the waterbed inequality; it also finds stabilizing scalar
//! gains for test loops by a Nyquist winding criterion.

use crate::error::{Error, Result};
use crate::linalg;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Rational transfer function with a pure output delay: num(s)/den(s) *
/// e^{-delay s}. Coefficients are ascending in powers of s.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RationalDelayTf {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
    pub delay: f64,
}

fn poly_at(coeffs: &[f64], s: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * s + c;
    }
    acc
}

impl RationalDelayTf {
    pub fn new(num: Vec<f64>, den: Vec<f64>, delay: f64) -> Result<Self> {
        if num.is_empty() || !num.iter().all(|c| c.is_finite()) {
            return Err(Error::Domain("numerator must be a finite polynomial".into()));
        }
        if den.iter().all(|&c| c == 0.0) || !den.iter().all(|c| c.is_finite()) {
            return Err(Error::Domain("denominator must be a nonzero polynomial".into()));
        }
        if !(delay >= 0.0 && delay.is_finite()) {
            return Err(Error::Domain("delay must be finite and nonnegative".into()));
        }
        Ok(Self { num, den, delay })
    }

    /// Constant gain, handy as a proportional controller.
    pub fn constant(k: f64) -> Self {
        Self {
            num: vec![k],
            den: vec![1.0],
            delay: 0.0,
        }
    }

    /// Numerator (with the delay factor attached) and denominator evaluated
    /// separately, so callers can form closed-loop quantities without
    /// dividing through a pole.
    pub fn parts_at(&self, s: Complex64) -> (Complex64, Complex64) {
        let shift = (-self.delay * s).exp();
        (poly_at(&self.num, s) * shift, poly_at(&self.den, s))
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        let (n, d) = self.parts_at(s);
        n / d
    }
}

/// A closed loop around a plant with one unstable pole and at most one
/// unstable zero. The pole and zero are carried explicitly because every
/// robustness law below is parameterized by them; the delay is the sum of
/// the plant and controller delays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoopSpec {
    pub plant: RationalDelayTf,
    pub controller: RationalDelayTf,
    pub pole: f64,
    pub zero: Option<f64>,
}

impl LoopSpec {
    pub fn total_delay(&self) -> f64 {
        self.plant.delay + self.controller.delay
    }

    pub fn fragility(&self) -> Result<f64> {
        fragility(self.pole, self.zero, self.total_delay())
    }

    /// S and T at an arbitrary complex frequency, formed over the common
    /// closed-loop denominator D = den_P den_C + num_P num_C e^{-tau s}, so
    /// S + T = 1 holds to rounding and the interpolation values at the
    /// plant's right-half-plane pole and zero come out exact.
    pub fn sensitivity_at(&self, s: Complex64) -> Result<(Complex64, Complex64)> {
        let (np, dp) = self.plant.parts_at(s);
        let (nc, dc) = self.controller.parts_at(s);
        let open_den = dp * dc;
        let open_num = np * nc;
        let closed = open_den + open_num;
        let scale = open_den.norm().max(open_num.norm());
        if closed.norm() <= 1e-12 * scale {
            return Err(Error::PoleOnAxis { omega: s.im });
        }
        Ok((open_den / closed, open_num / closed))
    }

    /// Nyquist test on the imaginary axis: the closed loop is stable iff
    /// 1 + L(j omega) winds once counterclockwise around the origin as omega
    /// sweeps the axis (the loop carries exactly one open right-half-plane
    /// pole). Returns false when the sweep passes too close to the origin
    /// to trust the count.
    pub fn is_stable(&self) -> bool {
        match self.winding_number() {
            Some(w) => (w - 1.0).abs() < 0.25,
            None => false,
        }
    }

    fn char_at(&self, omega: f64) -> Complex64 {
        let s = Complex64::new(0.0, omega);
        let (np, dp) = self.plant.parts_at(s);
        let (nc, dc) = self.controller.parts_at(s);
        (dp * dc + np * nc) / (dp * dc)
    }

    fn winding_number(&self) -> Option<f64> {
        let grid = log_grid(1e-4, 1e4, 20_000);
        let mut sweep: Vec<f64> = grid.iter().rev().map(|w| -w).collect();
        sweep.extend(grid.iter().copied());
        let mut total = 0.0;
        let mut prev_w = sweep[0];
        let mut prev_f = self.char_at(prev_w);
        for &w in &sweep[1..] {
            let f = self.char_at(w);
            total += self.arg_step(prev_w, prev_f, w, f, 0)?;
            prev_w = w;
            prev_f = f;
        }
        Some(total / (2.0 * PI))
    }

    fn arg_step(&self, w0: f64, f0: Complex64, w1: f64, f1: Complex64, depth: u32) -> Option<f64> {
        if f0.norm() < 1e-9 || f1.norm() < 1e-9 {
            // Characteristic function grazes the origin: marginal loop.
            return None;
        }
        let step = (f1 / f0).arg();
        if step.abs() <= 0.5 * PI {
            return Some(step);
        }
        if depth >= 28 {
            return None;
        }
        let wm = 0.5 * (w0 + w1);
        let fm = self.char_at(wm);
        Some(self.arg_step(w0, f0, wm, fm, depth + 1)? + self.arg_step(wm, fm, w1, f1, depth + 1)?)
    }
}

/// S and T at the real frequency omega.
pub fn sensitivity(loop_spec: &LoopSpec, omega: f64) -> Result<(Complex64, Complex64)> {
    loop_spec.sensitivity_at(Complex64::new(0.0, omega))
}

/// Fragility of a loop with unstable pole `pole`, unstable zero `zero`
/// (None for a plant with no right-half-plane zero), and total delay:
/// F = delay * pole + ln|(pole + zero)/(pole - zero)|, the zero term absent
/// when there is no zero. This is the controller-independent floor under
/// ln ||T||_inf.
pub fn fragility(pole: f64, zero: Option<f64>, delay: f64) -> Result<f64> {
    if !(pole > 0.0 && pole.is_finite()) || !(delay >= 0.0 && delay.is_finite()) {
        return Err(Error::Domain("fragility needs pole > 0 and delay >= 0".into()));
    }
    match zero {
        None => Ok(delay * pole),
        Some(q) => {
            if !(q > 0.0 && q.is_finite()) {
                return Err(Error::Domain("unstable zero must be positive".into()));
            }
            if q == pole {
                return Err(Error::SingularFragility(format!(
                    "pole and zero coincide at {pole}; no finite controller helps"
                )));
            }
            Ok(delay * pole + ((pole + q) / (pole - q)).abs().ln())
        }
    }
}

/// Log-spaced grid of n frequencies over [lo, hi].
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Peak magnitude of g(j omega) over the grid, refined by golden-section
/// search between the neighbors of the grid argmax.
pub fn hinf_norm(g: impl Fn(f64) -> Complex64, grid: &[f64]) -> f64 {
    assert!(grid.len() >= 2);
    let mut best = 0usize;
    let mut peak = 0.0f64;
    for (i, &w) in grid.iter().enumerate() {
        let m = g(w).norm();
        if m > peak {
            peak = m;
            best = i;
        }
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    if hi > lo {
        let refined = linalg::maximize_scalar(|w| g(w).norm(), lo, hi);
        peak = peak.max(refined.value);
    }
    peak
}

/// Poisson-weighted log integral of |T|, with the clipping flag raised when
/// |T| underflows the log.
#[derive(Debug, Clone, Copy)]
pub struct WeightedIntegral {
    pub value: f64,
    pub clipped: bool,
}

/// (1/pi) Integral of ln|T(j omega)| * pole/(pole^2 + omega^2) over the whole
/// axis, evaluated as twice the positive half by symmetry. The window is cut
/// where the weight mass in each tail drops below 1e-8 and each log panel is
/// integrated by adaptive Simpson quadrature; ln|T| is clipped at -700 (and
/// flagged) where |T| underflows.
pub fn bode_weighted_integral(t: impl Fn(f64) -> Complex64, pole: f64) -> WeightedIntegral {
    assert!(pole > 0.0 && pole.is_finite());
    let tail = 1e-8;
    let w_lo = pole * (0.5 * PI * tail).tan();
    let w_hi = pole / (0.5 * PI * tail).tan();
    let mut clipped = false;
    // Integrand in theta = ln omega: ln|T| * weight * omega.
    let mut f = |theta: f64| {
        let w = theta.exp();
        let log_mag = t(w).norm().ln();
        let log_mag = if log_mag <= -700.0 {
            clipped = true;
            -700.0
        } else {
            log_mag
        };
        log_mag * pole / (pole * pole + w * w) * w
    };
    let panels = 200usize;
    let (a, b) = (w_lo.ln(), w_hi.ln());
    let mut sum = 0.0;
    for i in 0..panels {
        let t0 = a + (b - a) * i as f64 / panels as f64;
        let t1 = a + (b - a) * (i + 1) as f64 / panels as f64;
        sum += adaptive_simpson(&mut f, t0, t1, 1e-10, 30);
    }
    WeightedIntegral {
        value: 2.0 / PI * sum,
        clipped,
    }
}

fn adaptive_simpson(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        left + right + err / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Weight mass the Poisson kernel of `pole` puts on |omega| in [w1, w2]:
/// (2/pi)(atan(w2/pole) - atan(w1/pole)). The full axis carries mass 1.
pub fn poisson_band_mass(pole: f64, w1: f64, w2: f64) -> f64 {
    2.0 / PI * ((w2 / pole).atan() - (w1 / pole).atan())
}

#[derive(Debug, Clone, Copy)]
pub struct WaterbedReport {
    pub c1: f64,
    pub c2: f64,
    pub lhs: f64,
    pub fragility: f64,
    pub holds: bool,
}

/// Two-band form of the conservation law: with M1 the peak of |T| on the
/// band [w1, w2] and M2 the global peak, c1 ln M1 + c2 ln M2 >= F, where c1
/// is the Poisson band mass of the pole and c2 its complement. Splitting
/// the weight this way makes the inequality a consequence of the weighted
/// log integral bound: the integrand is at most ln M1 on the band and at
/// most ln M2 elsewhere.
pub fn waterbed_check(
    t: impl Fn(f64) -> Complex64,
    pole: f64,
    zero: Option<f64>,
    delay: f64,
    w1: f64,
    w2: f64,
) -> Result<WaterbedReport> {
    if !(w1 > 0.0 && w2 > w1) {
        return Err(Error::Domain("need 0 < w1 < w2 for the waterbed band".into()));
    }
    let frag = fragility(pole, zero, delay)?;
    let c1 = poisson_band_mass(pole, w1, w2);
    let c2 = 1.0 - c1;
    let m1 = hinf_norm(&t, &log_grid(w1, w2, 4_000));
    let global = hinf_norm(&t, &log_grid(1e-4_f64.min(w1), 1e4_f64.max(w2), 10_000));
    let m2 = global.max(m1);
    let lhs = c1 * m1.ln() + c2 * m2.ln();
    Ok(WaterbedReport {
        c1,
        c2,
        lhs,
        fragility: frag,
        holds: lhs >= frag - 1e-3,
    })
}

/// Scalar gain search for test loops: tries log-spaced gains k in
/// [1e-3, 1e3] as proportional controllers around the plant, keeps those the
/// Nyquist test accepts, and returns the loop at the middle stable gain
/// (middle in log order, away from both window edges). Assumes the plant
/// carries exactly one right-half-plane pole, as every loop here does.
pub fn find_stabilizing_gain(
    plant: &RationalDelayTf,
    pole: f64,
    zero: Option<f64>,
) -> Result<LoopSpec> {
    let mut stable: Vec<f64> = Vec::new();
    for k in log_grid(1e-3, 1e3, 160) {
        let candidate = LoopSpec {
            plant: plant.clone(),
            controller: RationalDelayTf::constant(k),
            pole,
            zero,
        };
        if candidate.is_stable() {
            stable.push(k);
        }
    }
    if stable.is_empty() {
        return Err(Error::Domain(
            "no stabilizing proportional gain on the search grid".into(),
        ));
    }
    let k = stable[stable.len() / 2];
    Ok(LoopSpec {
        plant: plant.clone(),
        controller: RationalDelayTf::constant(k),
        pole,
        zero,
    })
}
