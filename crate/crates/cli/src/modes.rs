//! One runner per subcommand: execute the configured experiment, write its
//! CSV tables into the output directory, and print a one-line summary.

use crate::config::{BodeConfig, ParetoConfig, SensorimotorConfig, SimulateConfig};
use crate::csvout::CsvTable;
use layerlab_core::bode::{
    bode_weighted_integral, find_stabilizing_gain, fragility, hinf_norm, log_grid, sensitivity,
    waterbed_check, LoopSpec, RationalDelayTf,
};
use layerlab_core::multirate::{run_mission, trace_monitor};
use layerlab_core::pareto::{
    dual_certificate, generate_paper_instance, lqr_pareto, minimax_point, pareto_sweep,
    sigma_closed_form, sigma_empirical, weight_grid,
};
use layerlab_core::sensorimotor::{
    layered_vision_cost, optimize_delay, tradeoff_cost, LayeredVisionSpec, PlantScalar,
    ResourceTradeoff,
};
use layerlab_core::nalgebra::{DMatrix, DVector};
use layerlab_core::num_complex::Complex64;
use layerlab_core::{Error, Result, Rng};
use std::path::Path;

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn run_simulate(cfg: &SimulateConfig, out: &Path) -> Result<()> {
    let mission = cfg.to_mission()?;
    let log = run_mission(&mission)?;

    let mut table = CsvTable::new(&[
        "t",
        "x1",
        "x2",
        "theta",
        "speed",
        "turn_rate",
        "ref1",
        "ref2",
        "tracking_err",
        "h_obstacle",
        "filter_active",
        "heading_violation",
        "input_violation",
    ]);
    for rec in &log.records {
        table.push(vec![
            rec.t,
            rec.state.x1,
            rec.state.x2,
            rec.state.theta,
            rec.input.speed,
            rec.input.turn_rate,
            rec.y_ref[0],
            rec.y_ref[1],
            rec.tracking_err,
            rec.h_obstacle.unwrap_or(f64::INFINITY),
            flag(rec.filter_active),
            flag(rec.heading_violation),
            flag(rec.input_violation),
        ]);
    }
    table.write(&out.join("runlog.csv"))?;

    let satisfied = trace_monitor(&log, &mission.waypoint_region, &mission.goal_region);
    println!(
        "simulate: completed={} time={} waypoint_time={} max_tracking_err={:.4} min_barrier={:.4} planner_solves={} trace_satisfied={}",
        log.completed,
        log.completion_time.map_or("-".into(), |t| format!("{t:.3}")),
        log.waypoint_time.map_or("-".into(), |t| format!("{t:.3}")),
        log.max_tracking_err,
        log.min_h_obstacle,
        log.planner_solves,
        satisfied,
    );
    Ok(())
}

pub fn run_pareto(cfg: &ParetoConfig, seed: u64, out: &Path) -> Result<()> {
    let weights = weight_grid(cfg.weights);

    let mut sigma_table = CsvTable::new(&[
        "shared_rows",
        "sigma_closed_form",
        "sigma_empirical",
        "minimax_cost1",
        "minimax_cost2",
        "dual_value",
        "duality_gap",
    ]);
    let mut frontier = CsvTable::new(&["lambda1", "cost1", "cost2"]);
    let mut summary_sigma = 0.0;
    for k in 0..=cfg.m {
        let problem = generate_paper_instance(seed, cfg.m, k)?;
        let sweep = pareto_sweep(&problem, &weights)?;
        let mm = minimax_point(&problem)?;
        let emp = sigma_empirical(&sweep, &mm);
        let cf = sigma_closed_form(&problem)?;
        let cert = dual_certificate(&problem)?;
        sigma_table.push(vec![
            k as f64,
            cf,
            emp,
            mm.costs.0,
            mm.costs.1,
            cert.dual_value,
            cert.gap,
        ]);
        if k == cfg.sweep_k {
            summary_sigma = cf;
            for (lambda1, (c1, c2)) in sweep.weights.iter().zip(&sweep.costs) {
                frontier.push(vec![*lambda1, *c1, *c2]);
            }
        }
    }
    sigma_table.write(&out.join("sigma_table.csv"))?;
    frontier.write(&out.join("pareto.csv"))?;

    let a = DMatrix::from_element(1, 1, 1.0);
    let b = DMatrix::from_element(1, 1, 1.0);
    let x0 = DVector::from_element(1, 1.0);
    let (lo, hi) = (cfg.lqr.rho_min.ln(), cfg.lqr.rho_max.ln());
    let rho_grid: Vec<f64> = (0..cfg.lqr.points)
        .map(|i| (lo + (hi - lo) * i as f64 / (cfg.lqr.points - 1) as f64).exp())
        .collect();
    let mut lqr_table = CsvTable::new(&["rho", "state_cost", "control_cost"]);
    for pt in lqr_pareto(&a, &b, &x0, cfg.lqr.horizon, &rho_grid)? {
        lqr_table.push(vec![pt.rho, pt.state_cost, pt.control_cost]);
    }
    lqr_table.write(&out.join("lqr_pareto.csv"))?;

    println!(
        "pareto: m={} shared-row sweep 0..={} done, sigma at k={} is {:.6}, {} weights, {} LQR points",
        cfg.m,
        cfg.m,
        cfg.sweep_k,
        summary_sigma,
        cfg.weights,
        cfg.lqr.points,
    );
    Ok(())
}

pub fn run_sensorimotor(cfg: &SensorimotorConfig, out: &Path) -> Result<()> {
    let plant = PlantScalar { a: cfg.pole };
    let trade = ResourceTradeoff {
        lambda: cfg.lambda,
        compute_delay: 0.0,
    };

    let (lo, hi) = (1e-3f64.ln(), 1e3f64.ln());
    let mut kradeoff = CsvTable::new(&["t_s", "delay_cost", "quantization_cost", "total_cost"]);
    for i in 0..cfg.ts_points {
        let t_s = (lo + (hi - lo) * i as f64 / (cfg.ts_points - 1) as f64).exp();
        let c = tradeoff_cost(&plant, &trade, t_s, 0.0);
        kradeoff.push(vec![t_s, c.delay, c.quantization, c.total()]);
    }
    kradeoff.write(&out.join("kradeoff.csv"))?;

    let mut transition = CsvTable::new(&[
        "extra_delay",
        "compute_ts",
        "compute_rate",
        "compute_cost",
        "warning_ts",
        "warning_rate",
        "warning_cost",
    ]);
    for i in 0..=cfg.sweep_max {
        let computing = ResourceTradeoff {
            lambda: cfg.lambda,
            compute_delay: i as f64,
        };
        let c = optimize_delay(&plant, &computing, 0.0);
        let w = optimize_delay(&plant, &trade, i as f64);
        transition.push(vec![
            i as f64,
            c.signal_delay,
            c.rate,
            c.cost,
            w.signal_delay,
            w.rate,
            w.cost,
        ]);
    }
    transition.write(&out.join("phasetransition.csv"))?;

    let mut vision = CsvTable::new(&["reference_bound", "total_cost"]);
    for i in 0..cfg.vision.points {
        let delta = cfg.vision.delta_max * i as f64 / (cfg.vision.points - 1) as f64;
        let spec = LayeredVisionSpec {
            reflex_rate: cfg.vision.reflex_rate,
            reflex_delay: cfg.vision.reflex_delay,
            vision_rate: cfg.vision.vision_rate,
            vision_delay: cfg.vision.vision_delay,
            reference_bound: delta,
        };
        vision.push(vec![delta, layered_vision_cost(&spec, &plant)]);
    }
    vision.write(&out.join("vision.csv"))?;

    let best = optimize_delay(&plant, &trade, 0.0);
    println!(
        "sensorimotor: pole {} at resource level {}: best signaling delay {:.4} (rate {:.4} bits) costs {:.4}; sweeps to {} written",
        cfg.pole, cfg.lambda, best.signal_delay, best.rate, best.cost, cfg.sweep_max,
    );
    Ok(())
}

fn bode_plant(cfg: &BodeConfig) -> Result<RationalDelayTf> {
    // Plant families normalized so proportional feedback has a clean
    // stability window: (q - s)/(q (s - p)) with a zero, 1/(s - p) without.
    match cfg.zero {
        Some(q) => RationalDelayTf::new(vec![1.0, -1.0 / q], vec![-cfg.pole, 1.0], cfg.delay),
        None => RationalDelayTf::new(vec![1.0], vec![-cfg.pole, 1.0], cfg.delay),
    }
}

pub fn run_bode(cfg: &BodeConfig, seed: u64, out: &Path) -> Result<()> {
    let plant = bode_plant(cfg)?;
    let loop_spec = match cfg.gain {
        Some(k) => {
            let candidate = LoopSpec {
                plant,
                controller: RationalDelayTf::constant(k),
                pole: cfg.pole,
                zero: cfg.zero,
            };
            if !candidate.is_stable() {
                return Err(Error::Domain(format!(
                    "gain {k} does not stabilize the loop; omit it to search"
                )));
            }
            candidate
        }
        None => find_stabilizing_gain(&plant, cfg.pole, cfg.zero)?,
    };
    let gain = loop_spec.controller.num[0];

    let mut table = CsvTable::new(&["omega", "abs_s", "abs_t"]);
    for w in log_grid(1e-4, 1e4, cfg.grid_points) {
        let (s, t) = sensitivity(&loop_spec, w)?;
        table.push(vec![w, s.norm(), t.norm()]);
    }
    table.write(&out.join("sensitivity.csv"))?;

    let t_fn = |w: f64| {
        sensitivity(&loop_spec, w)
            .map(|(_, t)| t)
            .unwrap_or(Complex64::new(f64::INFINITY, 0.0))
    };
    let frag = fragility(cfg.pole, cfg.zero, cfg.delay)?;
    let peak = hinf_norm(t_fn, &log_grid(1e-4, 1e4, 10_000));
    let integral = bode_weighted_integral(t_fn, cfg.pole);

    let mut report = CsvTable::new(&[
        "w1",
        "w2",
        "band_mass",
        "complement_mass",
        "waterbed_lhs",
        "fragility",
        "holds",
        "gain",
        "ln_hinf",
        "bode_integral",
        "integral_clipped",
    ]);
    let mut bands = vec![(cfg.band[0], cfg.band[1])];
    let mut rng = Rng::new(seed);
    for _ in 0..cfg.random_bands {
        let w1 = 10f64.powf(rng.uniform_in(-3.0, 1.0));
        let w2 = w1 * 10f64.powf(rng.uniform_in(0.1, 2.0));
        bands.push((w1, w2));
    }
    let mut all_hold = true;
    for (w1, w2) in bands {
        let wb = waterbed_check(t_fn, cfg.pole, cfg.zero, cfg.delay, w1, w2)?;
        all_hold &= wb.holds;
        report.push(vec![
            w1,
            w2,
            wb.c1,
            wb.c2,
            wb.lhs,
            wb.fragility,
            flag(wb.holds),
            gain,
            peak.ln(),
            integral.value,
            flag(integral.clipped),
        ]);
    }
    report.write(&out.join("bode_report.csv"))?;

    println!(
        "bode: gain {:.4} stabilizes the loop; fragility {:.4}, ln peak {:.4}, weighted integral {:.4}, waterbed holds on all bands: {}",
        gain,
        frag,
        peak.ln(),
        integral.value,
        all_hold,
    );
    Ok(())
}
