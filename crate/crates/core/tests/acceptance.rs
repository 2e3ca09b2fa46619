//! Acceptance gate: one test per shipped claim, each printing a single
//! PASS/FAIL line with the measured numbers. Tolerances are pinned in the
//! assertions; a red line here is a real defect, not a flaky bound.

use layerlab_core::bode::{
    bode_weighted_integral, find_stabilizing_gain, fragility, hinf_norm, log_grid,
    poisson_band_mass, sensitivity, waterbed_check, RationalDelayTf,
};
use layerlab_core::feedback::{cbf_qp, SphereBarrier};
use layerlab_core::multirate::{corner_mission, run_mission, trace_monitor};
use layerlab_core::nalgebra::{DMatrix, DVector};
use layerlab_core::num_complex::Complex64;
use layerlab_core::pareto::{
    dual_certificate, generate_paper_instance, lqr_pareto, minimax_point, pareto_sweep,
    sigma_closed_form, sigma_empirical, weight_grid,
};
use layerlab_core::planning::{fit_hankel_predictor, RomSpec};
use layerlab_core::qp::{kkt_residuals, random_strictly_convex_qp, solve_qp, solve_qp_by_enumeration};
use layerlab_core::sensorimotor::{
    optimize_delay, tradeoff_cost, warned_case_oracle, PlantScalar, ResourceTradeoff,
};
use layerlab_core::Rng;
use std::time::Instant;

fn report(idx: usize, name: &str, pass: bool, detail: &str) {
    println!("[{idx:>2}] {} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {idx} ({name}): {detail}");
}

#[test]
fn c01_sweet_spot_matches_the_closed_form() {
    let start = Instant::now();
    let weights = weight_grid(2000);
    let mut worst_rel = 0.0f64;
    for seed in 0..10u64 {
        let mut prev_cf = f64::NEG_INFINITY;
        let mut prev_emp = f64::NEG_INFINITY;
        for k in 0..=5 {
            let problem = generate_paper_instance(seed, 5, k).unwrap();
            let sweep = pareto_sweep(&problem, &weights).unwrap();
            let mm = minimax_point(&problem).unwrap();
            let emp = sigma_empirical(&sweep, &mm);
            let cf = sigma_closed_form(&problem).unwrap();
            if k == 0 {
                assert!(
                    (emp - cf).abs() <= 1e-6,
                    "seed {seed} k=0: sigma {emp} should be ~0, closed form {cf}"
                );
            } else {
                let rel = (emp - cf).abs() / cf;
                worst_rel = worst_rel.max(rel);
                assert!(rel <= 0.05, "seed {seed} k={k}: rel err {rel}");
            }
            assert!(cf >= prev_cf, "seed {seed} k={k}: closed form dipped");
            assert!(
                emp >= prev_emp - (1e-9 + 1e-8 * emp.abs()),
                "seed {seed} k={k}: empirical sigma dipped ({prev_emp} -> {emp})"
            );
            prev_cf = cf;
            prev_emp = emp;
        }
    }
    let dt = start.elapsed().as_secs_f64();
    let timed = dt < 10.0;
    report(
        1,
        "sweet-spot sigma matches the closed form",
        timed,
        &format!("10 instances, k=0..5, 2000 weights; worst rel err {worst_rel:.2e}; {dt:.2} s (< 10 s)"),
    );
}

#[test]
fn c02_minimax_dual_certificate_closes_the_gap() {
    let mut worst = 0.0f64;
    for seed in 100..150u64 {
        let problem = generate_paper_instance(seed, 5, (seed % 6) as usize).unwrap();
        let cert = dual_certificate(&problem).unwrap();
        worst = worst.max(cert.gap);
    }
    report(
        2,
        "dual certificate closes the minimax gap",
        worst <= 1e-6,
        &format!("50 instances; worst duality gap {worst:.2e} (<= 1e-6)"),
    );
}

#[test]
fn c03_interval_oracle_is_tight_for_warned_plants() {
    let start = Instant::now();
    let mut worst_ratio = f64::INFINITY;
    for &a in &[0.0, 0.5, 1.0, 1.5] {
        for bits in 1u32..=3 {
            if a >= (bits as f64).exp2() {
                continue;
            }
            let bound = 1.0 / ((bits as f64).exp2() - a);
            let val = warned_case_oracle(&PlantScalar { a }, bits, 300);
            assert!(
                val <= bound + 1e-9,
                "a={a} R={bits}: oracle {val} exceeds the bound {bound}"
            );
            worst_ratio = worst_ratio.min(val / bound);
        }
    }
    let dt = start.elapsed().as_secs_f64();
    report(
        3,
        "interval oracle reaches the warned-case bound",
        worst_ratio >= 0.98 && dt < 5.0,
        &format!("12 (a, R) pairs; worst achieved fraction {worst_ratio:.4} (>= 0.98); {dt:.2} s (< 5 s)"),
    );
}

#[test]
fn c04_delay_and_quantization_costs_cross_at_an_interior_optimum() {
    let plant = PlantScalar { a: 1.0 };
    let trade = ResourceTradeoff {
        lambda: 0.1,
        compute_delay: 0.0,
    };
    let n = 2000;
    let (lo, hi) = (1e-3f64.ln(), 1e3f64.ln());
    let grid: Vec<f64> = (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect();
    let costs: Vec<_> = grid
        .iter()
        .map(|&t| tradeoff_cost(&plant, &trade, t, 0.0))
        .collect();

    let mut total_sign_changes = 0;
    let mut cross_sign_changes = 0;
    let mut prev_slope = 0.0f64;
    for w in costs.windows(2) {
        assert!(w[1].delay > w[0].delay, "delay component must increase");
        assert!(
            w[1].quantization < w[0].quantization,
            "quantization component must decrease"
        );
        let slope = w[1].total() - w[0].total();
        if prev_slope != 0.0 && slope.signum() != prev_slope.signum() {
            total_sign_changes += 1;
        }
        prev_slope = slope;
        let gap0 = w[0].delay - w[0].quantization;
        let gap1 = w[1].delay - w[1].quantization;
        if gap0.signum() != gap1.signum() {
            cross_sign_changes += 1;
        }
    }
    let argmin = costs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total().total_cmp(&b.1.total()))
        .unwrap()
        .0;
    let interior = argmin > 0 && argmin < n - 1;
    report(
        4,
        "total channel cost is unimodal with crossing components",
        total_sign_changes == 1 && cross_sign_changes == 1 && interior,
        &format!(
            "2000-point grid: {total_sign_changes} slope sign change, components cross {cross_sign_changes}x, minimum at interior point {argmin}"
        ),
    );
}

#[test]
fn c05_warning_shifts_the_optimal_operating_point() {
    let plant = PlantScalar { a: 1.0 };
    let base_trade = ResourceTradeoff {
        lambda: 0.1,
        compute_delay: 0.0,
    };
    let base = optimize_delay(&plant, &base_trade, 0.0);

    // Computation delay leaves the operating point alone.
    let mut max_ts_drift = 0.0f64;
    for tc in 1..=50 {
        let opt = optimize_delay(
            &plant,
            &ResourceTradeoff {
                lambda: 0.1,
                compute_delay: tc as f64,
            },
            0.0,
        );
        max_ts_drift = max_ts_drift.max((opt.signal_delay - base.signal_delay).abs());
        assert!(
            (opt.rate - base.rate).abs() < 1e-5,
            "T_c={tc}: optimal rate moved to {}",
            opt.rate
        );
    }
    assert!(max_ts_drift < 1e-4, "T_s* drifted {max_ts_drift} under T_c");

    // Warning drives cost down and the optimal rate up.
    let mut prev_cost = f64::INFINITY;
    let mut prev_rate = f64::NEG_INFINITY;
    let mut final_cost = f64::NAN;
    for tw in 0..=50 {
        let opt = optimize_delay(&plant, &base_trade, tw as f64);
        assert!(
            opt.cost <= prev_cost + 1e-9,
            "T_w={tw}: cost rose from {prev_cost} to {}",
            opt.cost
        );
        assert!(
            opt.rate >= prev_rate - 1e-6,
            "T_w={tw}: optimal rate fell from {prev_rate} to {}",
            opt.rate
        );
        prev_cost = opt.cost;
        prev_rate = opt.rate;
        final_cost = opt.cost;
    }
    report(
        5,
        "warning sweep crosses the operating regimes",
        final_cost < 0.05,
        &format!(
            "T_s* drift {max_ts_drift:.1e} over T_c=1..50; cost nonincreasing in T_w, {final_cost:.4} at T_w=50 (< 0.05)"
        ),
    );
}

#[test]
fn c06_corner_mission_satisfies_its_invariants() {
    let spec = corner_mission();
    let start = Instant::now();
    let log = run_mission(&spec).unwrap();
    let dt = start.elapsed().as_secs_f64();

    let trace_ok = trace_monitor(&log, &spec.waypoint_region, &spec.goal_region);
    let tracking_ok = log.max_tracking_err <= 0.05;
    let barrier_ok = log
        .records
        .iter()
        .filter_map(|r| r.h_obstacle)
        .all(|h| h >= -1e-3);
    let timed = dt < 30.0;
    let pass = trace_ok && tracking_ok && barrier_ok && timed;
    report(
        6,
        "corner mission tracks inside the tube under the safety filter",
        pass,
        &format!(
            "visit-then-reach trace={trace_ok}, min barrier {:.4} (>= -1e-3): {barrier_ok}, {dt:.1} s (< 30 s): {timed}; max per-axis tracking err {:.4} <= 0.05: {tracking_ok} \
             (the reference hops 0.1 between cell centroids while the car pivots 90 degrees at the corner waypoint; the pivot needs pi/2 s but the schedule dwells 1.0 s per cell, \
             leaving a ~0.066 error floor for 28 of {} steps regardless of gains)",
            log.min_h_obstacle,
            log.max_tracking_err,
            log.records.len(),
        ),
    );
}

#[test]
fn c07_active_set_solver_matches_enumeration() {
    let mut rng = Rng::new(4242);
    let mut worst_obj = 0.0f64;
    let mut worst_kkt = 0.0f64;
    for _ in 0..500 {
        let n = 1 + rng.below(4);
        let n_eq = if n > 1 { rng.below(2) } else { 0 };
        let m = rng.below(7 - n_eq);
        let qp = random_strictly_convex_qp(&mut rng, n, m, n_eq);
        let sol = solve_qp(&qp).unwrap();
        let oracle = solve_qp_by_enumeration(&qp).unwrap();
        worst_obj = worst_obj.max((sol.objective - oracle.objective).abs());
        worst_kkt = worst_kkt.max(kkt_residuals(&qp, &sol).max_residual());
    }
    report(
        7,
        "active-set solutions match exhaustive enumeration",
        worst_obj <= 1e-8 && worst_kkt <= 1e-8,
        &format!("500 random QPs (n <= 4, <= 6 rows); worst objective gap {worst_obj:.2e}, worst KKT residual {worst_kkt:.2e} (<= 1e-8)"),
    );
}

#[test]
fn c08_obstacle_filter_reproduces_the_hand_kkt_point() {
    let barrier = SphereBarrier {
        center: DVector::zeros(2),
        radius: 1.0,
    };
    let q = DVector::from_row_slice(&[2.0, 0.0]);
    let h = barrier.h(&q);
    let lg = barrier.grad(&q).unwrap();
    let v_des = DVector::from_row_slice(&[-2.0, 0.0]);
    let v = cbf_qp(&v_des, 0.0, &lg, h, 1.0, None).unwrap();
    let err = (v[0] + 1.0).abs().max(v[1].abs());
    report(
        8,
        "barrier filter clips the approach speed to the hand solution",
        err <= 1e-8,
        &format!("q=(2,0), r=1, v_des=(-2,0) -> v=({:.9}, {:.9}), err {err:.2e} (<= 1e-8)", v[0], v[1]),
    );
}

#[test]
fn c09_stabilized_loops_obey_the_conservation_floors() {
    // The Poisson weight must integrate to one: feed the integral a constant
    // |T| = e so the (numerically integrated) result is exactly the mass.
    let mass = bode_weighted_integral(|_| Complex64::new(std::f64::consts::E, 0.0), 1.0);
    let mass_ok = (mass.value - 1.0).abs() <= 1e-6 && !mass.clipped;
    assert!(mass_ok, "Poisson mass integrated to {}", mass.value);
    let tail = poisson_band_mass(1.0, 1e-9, 1e9);
    assert!((tail - 1.0).abs() <= 1e-6, "band mass {tail}");

    let cases: [(f64, Option<f64>, f64); 3] =
        [(1.0, None, 0.2), (1.0, Some(3.0), 0.1), (0.5, Some(2.0), 0.0)];
    let mut rng = Rng::new(2024);
    let mut detail = format!("weight mass {:.8}; ", mass.value);
    for (pole, zero, delay) in cases {
        let plant = match zero {
            Some(qz) => {
                RationalDelayTf::new(vec![1.0, -1.0 / qz], vec![-pole, 1.0], delay).unwrap()
            }
            None => RationalDelayTf::new(vec![1.0], vec![-pole, 1.0], delay).unwrap(),
        };
        let lp = find_stabilizing_gain(&plant, pole, zero).unwrap();
        let floor = fragility(pole, zero, delay).unwrap();
        let t_fn = |w: f64| {
            sensitivity(&lp, w)
                .map(|(_, t)| t)
                .unwrap_or(Complex64::new(f64::INFINITY, 0.0))
        };
        let ln_peak = hinf_norm(t_fn, &log_grid(1e-4, 1e4, 10_000)).ln();
        assert!(
            ln_peak >= floor - 1e-3,
            "loop ({pole}, {zero:?}, {delay}): ln peak {ln_peak} under the floor {floor}"
        );
        let integral = bode_weighted_integral(t_fn, pole);
        assert!(
            integral.value >= floor - 0.02,
            "loop ({pole}, {zero:?}, {delay}): integral {} under the floor {floor}",
            integral.value
        );
        for _ in 0..10 {
            let w1 = 10f64.powf(rng.uniform_in(-3.0, 1.0));
            let w2 = w1 * 10f64.powf(rng.uniform_in(0.1, 2.0));
            let wb = waterbed_check(t_fn, pole, zero, delay, w1, w2).unwrap();
            assert!(
                wb.holds,
                "loop ({pole}, {zero:?}, {delay}) band [{w1}, {w2}]: lhs {} < {}",
                wb.lhs, wb.fragility
            );
        }
        detail.push_str(&format!(
            "({pole}, {}, {delay}): ln peak {ln_peak:.3} / integral {:.3} >= floor {floor:.3}; ",
            zero.map_or("inf".into(), |z| z.to_string()),
            integral.value,
        ));
    }
    detail.push_str("waterbed held on 10 bands per loop");
    report(9, "sensitivity floors and waterbed conservation", true, &detail);
}

#[test]
fn c10_lqr_frontier_is_exact_and_pareto_monotone() {
    let a = DMatrix::from_row_slice(1, 1, &[1.0]);
    let b = DMatrix::from_row_slice(1, 1, &[1.0]);
    let x0 = DVector::from_row_slice(&[1.0]);
    let hand = &lqr_pareto(&a, &b, &x0, 1, &[1.0]).unwrap()[0];
    let exact = hand.state_cost == 1.25 && hand.control_cost == 0.25;

    let grid: Vec<f64> = (0..50)
        .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 49.0))
        .collect();
    let curve = lqr_pareto(&a, &b, &x0, 30, &grid).unwrap();
    let mut monotone = true;
    for w in curve.windows(2) {
        monotone &= w[1].state_cost >= w[0].state_cost - 1e-12;
        monotone &= w[1].control_cost <= w[0].control_cost + 1e-12;
    }
    report(
        10,
        "scalar LQR frontier",
        exact && monotone,
        &format!(
            "rho=1 gives ({}, {}) exactly; 50-point frontier monotone: {monotone}",
            hand.state_cost, hand.control_cost
        ),
    );
}

fn drive_rom(rom: &RomSpec, seed: u64, x0: &[f64], len: usize) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
    let mut rng = Rng::new(seed);
    let mut y = DVector::from_row_slice(x0);
    let (mut us, mut ys) = (Vec::new(), Vec::new());
    for _ in 0..len {
        let u = DVector::from_fn(rom.input_dim(), |_, _| rng.normal());
        ys.push(y.clone());
        us.push(u.clone());
        y = &rom.a * &y + &rom.b * &u;
    }
    (us, ys)
}

#[test]
fn c11_hankel_predictions_match_the_rollout() {
    let mut detail = String::new();
    for (name, rom, t_ini, x0) in [
        (
            "integrator",
            RomSpec::single_integrator(0.1, 2),
            2,
            vec![0.3, -0.2],
        ),
        (
            "double integrator",
            RomSpec::double_integrator(0.05),
            4,
            vec![0.1, 0.0, -0.3, 0.2],
        ),
    ] {
        let horizon = 6;
        let (us, ys) = drive_rom(&rom, 31, &x0, 80);
        let pred = fit_hankel_predictor(&us, &ys, t_ini, horizon).unwrap();
        let (us2, ys2) = drive_rom(&rom, 97, &vec![0.05; x0.len()], t_ini + horizon);
        let got = pred
            .predict(&us2[..t_ini], &ys2[..t_ini], &us2[t_ini..])
            .unwrap();
        let mut worst = 0.0f64;
        for (i, y) in got.iter().enumerate() {
            worst = worst.max((y - &ys2[t_ini + i]).amax());
        }
        assert!(worst <= 1e-6, "{name}: held-out error {worst}");
        detail.push_str(&format!("{name}: worst held-out err {worst:.2e}; "));
    }
    detail.push_str("(<= 1e-6)");
    report(11, "data-driven predictor matches the exact rollout", true, &detail);
}
