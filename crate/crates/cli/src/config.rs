//! JSON scenario configuration: one file describes one run of one mode.
//!
//! The file carries a `mode` tag, a seed, and exactly one mode block whose
//! name matches the tag. Every numeric field is validated here, before any
//! computation starts, and violations name the offending field so the CLI
//! can exit with a configuration error.

use layerlab_core::decision::{cells_intersecting, GridWorld};
use layerlab_core::feedback::DubinsObstacle;
use layerlab_core::multirate::{FlatGains, MissionSpec, RefInterp, TargetShape};
use layerlab_core::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mode: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pareto: Option<ParetoConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensorimotor: Option<SensorimotorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bode: Option<BodeConfig>,
}

/// Closed-loop gridworld mission: grid, regions, rates, and the safety
/// filter. Mirrors the mission runner's spec, with the target cell sets
/// derived from the continuous regions.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub grid_n: usize,
    pub start_cell: [usize; 2],
    pub initial_heading: f64,
    pub waypoint: TargetShape,
    pub goal: TargetShape,
    pub tau: f64,
    pub dt: f64,
    /// Planner steps the schedule dwells on each cell.
    pub dwell: usize,
    pub horizon: usize,
    /// Tube tightening below the cell half-width.
    pub tube_margin: f64,
    pub box_bound: f64,
    pub reference: RefInterp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstacle: Option<DubinsObstacle>,
    pub cbf_alpha: f64,
    pub cbf_turn_weight: f64,
    pub timeout: f64,
    pub input_box: f64,
    pub heading_box: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<FlatGains>,
}

/// Bi-criterion least squares sweep plus the scalar LQR frontier.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParetoConfig {
    /// Rows per criterion; the instance is m x 2m with shared first k rows.
    pub m: usize,
    /// Weight-grid size for the empirical sweet-spot estimate.
    pub weights: usize,
    /// Shared-row count whose full sweep lands in pareto.csv.
    pub sweep_k: usize,
    pub lqr: LqrConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LqrConfig {
    pub horizon: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    pub points: usize,
}

/// Speed-accuracy tradeoff sweeps for a scalar pole behind a rate-limited
/// channel, plus the two-loop vision model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorimotorConfig {
    pub lambda: f64,
    pub pole: f64,
    /// Resolution of the delay sweep table.
    pub ts_points: usize,
    /// Both delay sweeps run over 0..=sweep_max.
    pub sweep_max: usize,
    pub vision: VisionConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisionConfig {
    pub reflex_rate: f64,
    pub reflex_delay: f64,
    pub vision_rate: f64,
    pub vision_delay: f64,
    pub delta_max: f64,
    pub points: usize,
}

/// Robustness analysis of the delayed loop with one unstable pole and an
/// optional unstable zero. Without `gain` the CLI searches for a
/// stabilizing proportional gain itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodeConfig {
    pub pole: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero: Option<f64>,
    pub delay: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    /// Rows in the sensitivity table.
    pub grid_points: usize,
    /// Waterbed band checked first, before the seeded random ones.
    pub band: [f64; 2],
    pub random_bands: usize,
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
    let cfg: ScenarioConfig = serde_json::from_str(&text)
        .map_err(|e| Error::config("config", format!("invalid JSON: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

fn require(ok: bool, field: &str, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(field, message))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let blocks = [
            ("simulate", self.simulate.is_some()),
            ("pareto", self.pareto.is_some()),
            ("sensorimotor", self.sensorimotor.is_some()),
            ("bode", self.bode.is_some()),
        ];
        if !blocks.iter().any(|(name, _)| *name == self.mode) {
            return Err(Error::config(
                "mode",
                format!(
                    "unknown mode '{}'; expected simulate, pareto, sensorimotor, or bode",
                    self.mode
                ),
            ));
        }
        for (name, present) in blocks {
            if name == self.mode {
                require(present, name, "block for the selected mode is missing")?;
            } else {
                require(!present, name, "block does not match the selected mode")?;
            }
        }
        if let Some(c) = &self.simulate {
            c.validate()?;
        }
        if let Some(c) = &self.pareto {
            c.validate()?;
        }
        if let Some(c) = &self.sensorimotor {
            c.validate()?;
        }
        if let Some(c) = &self.bode {
            c.validate()?;
        }
        Ok(())
    }
}

impl SimulateConfig {
    fn validate(&self) -> Result<()> {
        require(self.grid_n >= 1, "simulate.grid_n", "must be at least 1")?;
        require(
            self.start_cell[0] < self.grid_n && self.start_cell[1] < self.grid_n,
            "simulate.start_cell",
            "must lie inside the grid",
        )?;
        require(self.initial_heading.is_finite(), "simulate.initial_heading", "must be finite")?;
        require(self.dt > 0.0, "simulate.dt", "must be positive")?;
        require(self.dt < self.tau, "simulate.dt", "must be < tau")?;
        let ratio = self.tau / self.dt;
        require(
            (ratio - ratio.round()).abs() <= 1e-9 * ratio,
            "simulate.dt",
            "tau must be an integer multiple of dt",
        )?;
        require(self.dwell >= 1, "simulate.dwell", "must be at least 1")?;
        require(self.horizon >= 1, "simulate.horizon", "must be at least 1")?;
        let half = 1.0 / self.grid_n as f64;
        require(
            self.tube_margin > 0.0 && self.tube_margin < half,
            "simulate.tube_margin",
            "must be positive and below the cell half-width",
        )?;
        require(self.box_bound > 0.0, "simulate.box_bound", "must be positive")?;
        require(self.timeout > 0.0, "simulate.timeout", "must be positive")?;
        require(self.input_box > 0.0, "simulate.input_box", "must be positive")?;
        require(self.heading_box > 0.0, "simulate.heading_box", "must be positive")?;
        if let Some(obs) = &self.obstacle {
            require(obs.radius > 0.0, "simulate.obstacle.radius", "must be positive")?;
            require(obs.kappa >= 0.0, "simulate.obstacle.kappa", "must be nonnegative")?;
            require(self.cbf_alpha > 0.0, "simulate.cbf_alpha", "must be positive")?;
            require(
                self.cbf_turn_weight > 0.0,
                "simulate.cbf_turn_weight",
                "must be positive",
            )?;
        }
        Ok(())
    }

    /// Build the mission: label the cells intersecting each region as the
    /// planner's targets, then assemble the runner spec.
    pub fn to_mission(&self) -> Result<MissionSpec> {
        let s1 = cells_intersecting(self.grid_n, &|x1, x2| self.waypoint.contains(x1, x2));
        let s2 = cells_intersecting(self.grid_n, &|x1, x2| self.goal.contains(x1, x2));
        let grid = GridWorld::new(self.grid_n, s1, s2, Default::default())?;
        Ok(MissionSpec {
            grid,
            start_cell: (self.start_cell[0], self.start_cell[1]),
            theta0: self.initial_heading,
            waypoint_region: self.waypoint,
            goal_region: self.goal,
            tau: self.tau,
            dt: self.dt,
            delta: self.dwell,
            horizon: self.horizon,
            tube_epsilon: self.tube_margin,
            box_bound: self.box_bound,
            gains: self.gains.unwrap_or_default(),
            reference: self.reference,
            obstacle: self.obstacle.clone(),
            cbf_alpha: self.cbf_alpha,
            cbf_turn_weight: self.cbf_turn_weight,
            timeout: self.timeout,
            input_box: self.input_box,
            heading_box: self.heading_box,
        })
    }
}

impl ParetoConfig {
    fn validate(&self) -> Result<()> {
        require(self.m >= 1, "pareto.m", "must be at least 1")?;
        require(self.weights >= 2, "pareto.weights", "must be at least 2")?;
        require(
            self.sweep_k <= self.m,
            "pareto.sweep_k",
            "must not exceed the row count m",
        )?;
        require(self.lqr.horizon >= 1, "pareto.lqr.horizon", "must be at least 1")?;
        require(
            self.lqr.rho_min > 0.0 && self.lqr.rho_min < self.lqr.rho_max,
            "pareto.lqr.rho_min",
            "need 0 < rho_min < rho_max",
        )?;
        require(self.lqr.points >= 2, "pareto.lqr.points", "must be at least 2")?;
        Ok(())
    }
}

impl SensorimotorConfig {
    fn validate(&self) -> Result<()> {
        require(
            self.lambda > 0.0 && self.lambda.is_finite(),
            "sensorimotor.lambda",
            "must be positive",
        )?;
        require(self.pole.is_finite(), "sensorimotor.pole", "must be finite")?;
        require(self.ts_points >= 2, "sensorimotor.ts_points", "must be at least 2")?;
        require(self.sweep_max >= 1, "sensorimotor.sweep_max", "must be at least 1")?;
        let v = &self.vision;
        require(v.reflex_rate > 0.0, "sensorimotor.vision.reflex_rate", "must be positive")?;
        require(v.vision_rate > 0.0, "sensorimotor.vision.vision_rate", "must be positive")?;
        require(
            v.reflex_delay >= 0.0,
            "sensorimotor.vision.reflex_delay",
            "must be nonnegative",
        )?;
        require(
            v.vision_delay >= 0.0,
            "sensorimotor.vision.vision_delay",
            "must be nonnegative",
        )?;
        require(v.delta_max >= 0.0, "sensorimotor.vision.delta_max", "must be nonnegative")?;
        require(v.points >= 2, "sensorimotor.vision.points", "must be at least 2")?;
        Ok(())
    }
}

impl BodeConfig {
    fn validate(&self) -> Result<()> {
        require(
            self.pole > 0.0 && self.pole.is_finite(),
            "bode.pole",
            "must be positive",
        )?;
        if let Some(q) = self.zero {
            require(q > 0.0 && q.is_finite(), "bode.zero", "must be positive")?;
            require(q != self.pole, "bode.zero", "must differ from the pole")?;
        }
        require(
            self.delay >= 0.0 && self.delay.is_finite(),
            "bode.delay",
            "must be nonnegative",
        )?;
        if let Some(k) = self.gain {
            require(k > 0.0 && k.is_finite(), "bode.gain", "must be positive")?;
        }
        require(self.grid_points >= 2, "bode.grid_points", "must be at least 2")?;
        require(
            self.band[0] > 0.0 && self.band[0] < self.band[1],
            "bode.band",
            "need 0 < band[0] < band[1]",
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_sensorimotor() -> String {
        r#"{
            "mode": "sensorimotor",
            "seed": 7,
            "sensorimotor": {
                "lambda": 0.1, "pole": 1.0, "ts_points": 50, "sweep_max": 5,
                "vision": {"reflex_rate": 2.0, "reflex_delay": 3.0,
                           "vision_rate": 1.5, "vision_delay": 9.0,
                           "delta_max": 1.0, "points": 5}
            }
        }"#
        .to_string()
    }

    #[test]
    fn round_trip_is_identity() {
        let cfg: ScenarioConfig = serde_json::from_str(&minimal_sensorimotor()).unwrap();
        cfg.validate().unwrap();
        let back = serde_json::to_string(&cfg).unwrap();
        let again: ScenarioConfig = serde_json::from_str(&back).unwrap();
        assert_eq!(
            serde_json::to_value(&cfg).unwrap(),
            serde_json::to_value(&again).unwrap()
        );
    }

    #[test]
    fn mode_and_block_must_agree() {
        let mut cfg: ScenarioConfig = serde_json::from_str(&minimal_sensorimotor()).unwrap();
        cfg.mode = "pareto".into();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("pareto"));
        cfg.mode = "warp".into();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("mode"));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = minimal_sensorimotor().replace("\"seed\": 7,", "\"seed\": 7, \"spin\": 1,");
        let parsed: std::result::Result<ScenarioConfig, _> = serde_json::from_str(&text);
        assert!(parsed.unwrap_err().to_string().contains("spin"));
    }

    #[test]
    fn sensorimotor_bounds_are_checked() {
        let text = minimal_sensorimotor().replace("\"lambda\": 0.1", "\"lambda\": -0.1");
        let cfg: ScenarioConfig = serde_json::from_str(&text).unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("sensorimotor.lambda"));
    }
}
