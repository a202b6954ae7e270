//! Complete run configuration, loaded from JSON with defaults for every field.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planners::PlannerKind;
use crate::sim::{BenchmarkConfig, EpisodeConfig, EpisodeResult};
use crate::world::{GenConfig, MapFile};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

fn err(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldSettings {
    #[serde(flatten)]
    pub generator: GenConfig,
    pub n_obstacles: usize,
    pub seed: u64,
    pub target_density: f64,
}

impl Default for WorldSettings {
    fn default() -> Self {
        Self {
            generator: GenConfig::default(),
            n_obstacles: 1,
            seed: 0,
            target_density: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkSettings {
    pub planners: Vec<PlannerKind>,
    pub obstacle_counts: Vec<usize>,
    pub n_maps: usize,
    pub base_seed: u64,
    pub workers: usize,
}

impl Default for BenchmarkSettings {
    fn default() -> Self {
        let b = BenchmarkConfig::default();
        Self {
            planners: b.planners,
            obstacle_counts: b.obstacle_counts,
            n_maps: b.n_maps,
            base_seed: b.base_seed,
            workers: b.workers,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub world: WorldSettings,
    pub episode: EpisodeConfig,
    pub benchmark: BenchmarkSettings,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| err("<file>", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks ranges, reporting the first offending field by its dotted path.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.world.generator;
        let positive = |path: &str, v: f64| if v > 0.0 { Ok(()) } else { Err(err(path, format!("must be positive, got {v}"))) };
        positive("world.width_m", g.width_m)?;
        positive("world.height_m", g.height_m)?;
        positive("world.resolution_m", g.resolution_m)?;
        positive("world.half_extent_min", g.half_extent_min)?;
        if g.half_extent_max < g.half_extent_min {
            return Err(err("world.half_extent_max", "must be at least half_extent_min"));
        }
        if g.start_clearance_m < 0.0 {
            return Err(err("world.start_clearance_m", "must be non-negative"));
        }
        if g.max_attempts == 0 {
            return Err(err("world.max_attempts", "must be at least 1"));
        }
        g.validate().map_err(|e| err("world", e.to_string()))?;
        if !(0.0..=1.0).contains(&self.world.target_density) {
            return Err(err("world.target_density", "must lie in [0, 1]"));
        }

        let e = &self.episode;
        if !(0.0..1.0).contains(&e.beta) {
            return Err(err("episode.beta", format!("must lie in [0, 1), got {}", e.beta)));
        }
        if e.t_max == 0 {
            return Err(err("episode.t_max", "must be at least 1"));
        }
        if e.n_a == 0 {
            return Err(err("episode.n_a", "must be at least 1"));
        }
        if !(e.d_max >= 0.0) {
            return Err(err("episode.d_max", "must be non-negative"));
        }
        e.sensor.validate().map_err(|x| err("episode.sensor", x.to_string()))?;
        let m = &e.mpc;
        if m.horizon == 0 {
            return Err(err("episode.mpc.horizon", "must be at least 1"));
        }
        positive("episode.mpc.dt", m.dt)?;
        for (path, v) in [
            ("episode.mpc.q_terminal", m.q_terminal),
            ("episode.mpc.q_a", m.q_a),
            ("episode.mpc.q_alpha", m.q_alpha),
            ("episode.mpc.robot_radius", m.robot_radius),
            ("episode.mpc.safety_margin", m.safety_margin),
        ] {
            if !(v >= 0.0) {
                return Err(err(path, format!("must be non-negative, got {v}")));
            }
        }
        positive("episode.mpc.solver.constraint_tolerance", m.solver.constraint_tolerance)?;
        positive("episode.mpc.solver.gradient_tolerance", m.solver.gradient_tolerance)?;
        m.limits.validate().map_err(|x| err("episode.mpc.limits", x))?;
        m.validate().map_err(|x| err("episode.mpc", x.to_string()))?;
        let greedy = &e.planners.greedy;
        if greedy.n_candidates == 0 {
            return Err(err("episode.planners.greedy.n_candidates", "must be at least 1"));
        }
        if !(greedy.delta_max >= 0.0) {
            return Err(err("episode.planners.greedy.delta_max", "must be non-negative"));
        }
        e.planners.mcts.validate().map_err(|x| err("episode.planners.mcts", x))?;

        let b = &self.benchmark;
        if b.planners.is_empty() {
            return Err(err("benchmark.planners", "must list at least one planner"));
        }
        if b.obstacle_counts.is_empty() {
            return Err(err("benchmark.obstacle_counts", "must list at least one count"));
        }
        if b.n_maps == 0 {
            return Err(err("benchmark.n_maps", "must be at least 1"));
        }
        Ok(())
    }

    pub fn benchmark_config(&self) -> BenchmarkConfig {
        BenchmarkConfig {
            planners: self.benchmark.planners.clone(),
            obstacle_counts: self.benchmark.obstacle_counts.clone(),
            n_maps: self.benchmark.n_maps,
            base_seed: self.benchmark.base_seed,
            workers: self.benchmark.workers,
            target_density: self.world.target_density,
            world: self.world.generator.clone(),
            episode: self.episode.clone(),
        }
    }
}

/// Everything needed to inspect or reproduce a single run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub config: RunConfig,
    pub map: MapFile,
    pub result: EpisodeResult,
}
