//! Performance limits of a scalar loop closed through a finite-rate, delayed
//! channel.
//!
//! The plant is x(k+1) = a x(k) + w(k - T_w) + Q(u(k - T_u)) with |w| <= 1,
//! where Q is a static memoryless quantizer spending R bits per step. The
//! minimal achievable sup|x| has a closed form that splits into a delay term
//! and a quantization term; layering enters through the resource constraint
//! R = lambda T_s, which trades signaling delay against rate, and through a
//! two-loop vision model whose cost is the sum of a delayed reflex loop and
//! a warned planning loop.

use crate::linalg;
use serde::{Deserialize, Serialize};

/// Scalar plant pole, the per-step open-loop gain.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PlantScalar {
    pub a: f64,
}

/// A communication channel: rate in bits per step, actuation delay, and
/// advanced warning of the disturbance. The net delay seen by the loop is
/// `actuation_delay - warning`; at zero or below, the controller acts on the
/// disturbance before it lands.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub rate: f64,
    pub actuation_delay: f64,
    pub warning: f64,
}

impl ChannelSpec {
    pub fn net_delay(&self) -> f64 {
        self.actuation_delay - self.warning
    }
}

/// The speed-accuracy coupling of one nerve: a resource level `lambda` ties
/// rate to signaling delay via R = lambda * T_s, while `compute_delay` adds a
/// fixed processing latency on top, T_u = T_s + T_c.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResourceTradeoff {
    pub lambda: f64,
    pub compute_delay: f64,
}

/// Cost split into the term contributed by waiting and the term contributed
/// by finite resolution. The split reproduces the two curves whose crossing
/// locates the best operating point.
#[derive(Debug, Clone, Copy)]
pub struct TradeoffCost {
    pub delay: f64,
    pub quantization: f64,
}

impl TradeoffCost {
    pub fn total(&self) -> f64 {
        self.delay + self.quantization
    }
}

/// Result of optimizing the signaling delay at a fixed resource level.
#[derive(Debug, Clone, Copy)]
pub struct OptimalDelay {
    pub signal_delay: f64,
    pub rate: f64,
    pub cost: f64,
}

/// Two-loop vision model: a reflex channel (rate, delay) compensating a unit
/// disturbance, and a vision channel tracking a reference bounded by
/// `reference_bound`. The vision loop runs warned (the reference is previewed
/// far enough ahead to cover its latency), so `vision_delay` does not enter
/// the cost; the field is kept because it is part of the loop's physical
/// description and budget.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LayeredVisionSpec {
    pub reflex_rate: f64,
    pub reflex_delay: f64,
    pub vision_rate: f64,
    pub vision_delay: f64,
    pub reference_bound: f64,
}

/// Geometric sum sum_{i=1}^{T} |a|^{i-1}, extended continuously to real T:
/// (|a|^T - 1)/(|a| - 1), with the limit T at |a| = 1 and 0 for T <= 0.
///
/// Written via expm1/ln_1p so the |a| -> 1 cancellation costs no accuracy;
/// the same expression covers a = 0 (ln_1p(-1) = -inf, expm1(-inf) = -1).
pub fn delay_sum(a: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let d = a.abs() - 1.0;
    if d == 0.0 {
        t
    } else {
        f64::exp_m1(t * f64::ln_1p(d)) / d
    }
}

fn cost_terms(a: f64, rate: f64, net_delay: f64) -> TradeoffCost {
    let g = a.abs();
    let pow2 = 2f64.powf(rate);
    if g >= pow2 {
        // No quantizer with 2^R levels can confine the state.
        return TradeoffCost {
            delay: delay_sum(a, net_delay),
            quantization: f64::INFINITY,
        };
    }
    let decay = if net_delay > 0.0 { g.powf(net_delay) } else { 1.0 };
    TradeoffCost {
        delay: delay_sum(a, net_delay),
        quantization: decay / (pow2 - g),
    }
}

/// Minimal achievable sup|x| over the channel: +inf when |a| >= 2^R,
/// 1/(2^R - |a|) when the net delay is zero or negative (warned case), and
/// sum_{i=1}^{T} |a|^{i-1} + |a|^T/(2^R - |a|) when it is positive.
pub fn optimal_cost(plant: &PlantScalar, channel: &ChannelSpec) -> f64 {
    cost_terms(plant.a, channel.rate, channel.net_delay()).total()
}

/// Cost at signaling delay `signal_delay` under the resource constraint:
/// rate lambda * T_s, net delay T_s + T_c - T_w. Both terms are reported.
pub fn tradeoff_cost(
    plant: &PlantScalar,
    trade: &ResourceTradeoff,
    signal_delay: f64,
    warning: f64,
) -> TradeoffCost {
    let rate = trade.lambda * signal_delay;
    let net = signal_delay + trade.compute_delay - warning;
    cost_terms(plant.a, rate, net)
}

/// Best signaling delay in [1e-3, 1e3] at the given resource level, found by
/// golden-section search. The cost is unimodal in T_s: the delay term grows
/// while the quantization term shrinks, with at worst a kink where the net
/// delay changes sign.
pub fn optimize_delay(
    plant: &PlantScalar,
    trade: &ResourceTradeoff,
    warning: f64,
) -> OptimalDelay {
    assert!(trade.lambda > 0.0, "resource level must be positive");
    let best = linalg::minimize_scalar(
        |t_s| tradeoff_cost(plant, trade, t_s, warning).total(),
        1e-3,
        1e3,
    );
    OptimalDelay {
        signal_delay: best.x,
        rate: trade.lambda * best.x,
        cost: best.value,
    }
}

/// Total cost of the two-loop model: the reflex loop pays the delayed-case
/// cost against the unit disturbance, the vision loop pays the warned-case
/// quantization cost scaled by the reference bound. +inf if either loop has
/// too little rate to confine the pole.
pub fn layered_vision_cost(spec: &LayeredVisionSpec, plant: &PlantScalar) -> f64 {
    let g = plant.a.abs();
    if g >= 2f64.powf(spec.reflex_rate) || g >= 2f64.powf(spec.vision_rate) {
        return f64::INFINITY;
    }
    let reflex = cost_terms(plant.a, spec.reflex_rate, spec.reflex_delay).total();
    reflex + spec.reference_bound / (2f64.powf(spec.vision_rate) - g)
}

/// Constructive check of the warned-case bound. Builds the static uniform
/// quantizer with 2^bits cells over [-(|a| e* + 1), |a| e* + 1] where
/// e* = 1/(2^bits - |a|), closes the loop u = Q(-a x - w), and propagates the
/// exact reachable set of x through `horizon` steps of worst-case |w| <= 1.
/// Returns the sup of |x| seen along the way.
///
/// The reachable set stays a finite union of intervals: the next state is
/// minus the quantization error of z = -a x - w, which is piecewise linear
/// in z, so each interval of z maps to one interval per quantizer cell it
/// touches. The cell half-width equals e*, which is why the quantizer
/// achieves the bound: once z fills a cell, the error fills [-e*, e*].
pub fn warned_case_oracle(plant: &PlantScalar, bits: u32, horizon: usize) -> f64 {
    let a = plant.a;
    let cells = (1u64 << bits) as f64;
    assert!(a.abs() < cells, "quantizer has too few cells to confine the pole");
    assert!(horizon >= 1);
    let e_star = 1.0 / (cells - a.abs());
    let half_range = a.abs() * e_star + 1.0;
    let width = 2.0 * half_range / cells;
    let last_cell = (1usize << bits) - 1;

    // Reachable x as sorted disjoint intervals; starts at the origin.
    let mut reach: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    let mut sup = 0.0f64;
    for _ in 0..horizon {
        let mut pieces: Vec<(f64, f64)> = Vec::new();
        for &(lo, hi) in &reach {
            // z = -a x - w over x in [lo, hi], |w| <= 1.
            let (p, q) = if a >= 0.0 { (-a * hi, -a * lo) } else { (-a * lo, -a * hi) };
            let (z_lo, z_hi) = (p - 1.0, q + 1.0);
            let first = cell_index(z_lo, half_range, width, last_cell);
            let last = cell_index(z_hi, half_range, width, last_cell);
            for idx in first..=last {
                let cell_lo = -half_range + idx as f64 * width;
                let cell_hi = cell_lo + width;
                let (part_lo, part_hi) = (z_lo.max(cell_lo), z_hi.min(cell_hi));
                if part_lo > part_hi {
                    continue;
                }
                let center = cell_lo + 0.5 * width;
                // x_next = -(z - center); the map is decreasing in z.
                pieces.push((center - part_hi, center - part_lo));
            }
        }
        pieces.sort_by(|u, v| u.0.total_cmp(&v.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for p in pieces {
            match merged.last_mut() {
                Some(tail) if p.0 <= tail.1 + 1e-15 => tail.1 = tail.1.max(p.1),
                _ => merged.push(p),
            }
        }
        for &(lo, hi) in &merged {
            sup = sup.max(lo.abs()).max(hi.abs());
        }
        reach = merged;
    }
    sup
}

fn cell_index(z: f64, half_range: f64, width: f64, last_cell: usize) -> usize {
    let raw = ((z + half_range) / width).floor();
    if raw < 0.0 {
        0
    } else {
        (raw as usize).min(last_cell)
    }
}
