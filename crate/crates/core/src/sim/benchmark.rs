use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_configured_episode, EpisodeConfig, SimError};
use crate::derive_seed;
use crate::planners::PlannerKind;
use crate::world::{generate_random_environment, sample_targets, GenConfig, GroundTruthTargets, WorldError, WorldMap};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkConfig {
    pub planners: Vec<PlannerKind>,
    pub obstacle_counts: Vec<usize>,
    pub n_maps: usize,
    pub base_seed: u64,
    /// Worker threads; results do not depend on it.
    pub workers: usize,
    pub target_density: f64,
    pub world: GenConfig,
    pub episode: EpisodeConfig,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            planners: vec![PlannerKind::Greedy, PlannerKind::Mcts],
            obstacle_counts: vec![1, 2, 3],
            n_maps: 100,
            base_seed: 0,
            workers: 1,
            target_density: 0.1,
            world: GenConfig::default(),
            episode: EpisodeConfig::default(),
        }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.to_string()));
        if self.planners.is_empty() {
            return bad("at least one planner is required");
        }
        if self.obstacle_counts.is_empty() {
            return bad("at least one obstacle count is required");
        }
        if self.n_maps == 0 {
            return bad("n_maps must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.target_density) {
            return bad("target_density must lie in [0, 1]");
        }
        self.world.validate()?;
        self.episode.validate()
    }

    pub fn map_seed(&self, map_index: usize) -> u64 {
        self.base_seed.wrapping_add(map_index as u64)
    }
}

/// One episode row of a benchmark, without the per-step log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub planner: PlannerKind,
    pub n_obstacles: usize,
    pub map_index: usize,
    pub map_seed: u64,
    pub episode_seed: u64,
    pub map_hash: Option<String>,
    pub error: Option<String>,
    pub cumulative_reward: f64,
    pub n_steps: usize,
    pub completed: bool,
    pub failure: bool,
    pub completion_time_s: f64,
    pub planner_runtime_total_s: f64,
    pub planner_runtime_mean_s: f64,
    pub planner_calls: usize,
    pub policy_steps: usize,
    pub entropy_initial: f64,
    pub entropy_final: f64,
    pub collisions: usize,
}

/// Aggregates for one planner and obstacle count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkCell {
    pub planner: PlannerKind,
    pub n_obstacles: usize,
    pub episodes: usize,
    pub reward_mean: f64,
    pub reward_std: f64,
    pub failure_pct: f64,
    /// Mean of `n_steps · dt` over all episodes, failures included.
    pub travel_time_s: f64,
    /// Mean per-call planner runtime, MPC excluded.
    pub runtime_s: f64,
    pub collisions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BenchmarkConfig,
    pub cells: Vec<BenchmarkCell>,
    pub episodes: Vec<EpisodeSummary>,
}

struct Scenario {
    n_obstacles: usize,
    map_index: usize,
    map_seed: u64,
    episode_seed: u64,
    env: Result<(WorldMap, GroundTruthTargets), String>,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Sample standard deviation; zero for fewer than two values.
fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Aggregates episode rows into cells ordered by obstacle count, then planner order.
pub fn aggregate(config: &BenchmarkConfig, episodes: &[EpisodeSummary]) -> Vec<BenchmarkCell> {
    let mut cells = Vec::new();
    for &n_obstacles in &config.obstacle_counts {
        for &planner in &config.planners {
            let rows: Vec<&EpisodeSummary> = episodes
                .iter()
                .filter(|e| e.planner == planner && e.n_obstacles == n_obstacles && e.error.is_none())
                .collect();
            let rewards: Vec<f64> = rows.iter().map(|e| e.cumulative_reward).collect();
            let failures = rows.iter().filter(|e| e.failure).count();
            cells.push(BenchmarkCell {
                planner,
                n_obstacles,
                episodes: rows.len(),
                reward_mean: mean(&rewards),
                reward_std: std_dev(&rewards),
                failure_pct: if rows.is_empty() { 0.0 } else { 100.0 * failures as f64 / rows.len() as f64 },
                travel_time_s: mean(&rows.iter().map(|e| e.completion_time_s).collect::<Vec<_>>()),
                runtime_s: mean(&rows.iter().map(|e| e.planner_runtime_mean_s).collect::<Vec<_>>()),
                collisions: rows.iter().map(|e| e.collisions).sum(),
            });
        }
    }
    cells
}

/// Generated map and hidden targets for one benchmark scenario.
pub fn make_environment(
    generator: &GenConfig,
    target_density: f64,
    n_obstacles: usize,
    map_seed: u64,
) -> Result<(WorldMap, GroundTruthTargets), WorldError> {
    let world = generate_random_environment(map_seed, n_obstacles, generator)?;
    let targets = sample_targets(&world, derive_seed(map_seed, &format!("targets/{n_obstacles}")), target_density);
    Ok((world, targets))
}

/// Sensor, heading and planner seed root shared by every planner on a scenario.
pub fn episode_seed(map_seed: u64, n_obstacles: usize) -> u64 {
    derive_seed(map_seed, &format!("episode/{n_obstacles}"))
}

fn build_scenario(config: &BenchmarkConfig, n_obstacles: usize, map_index: usize) -> Scenario {
    let map_seed = config.map_seed(map_index);
    Scenario {
        n_obstacles,
        map_index,
        map_seed,
        episode_seed: episode_seed(map_seed, n_obstacles),
        env: make_environment(&config.world, config.target_density, n_obstacles, map_seed).map_err(|e| e.to_string()),
    }
}

fn run_one(config: &BenchmarkConfig, scenario: &Scenario, planner: PlannerKind) -> EpisodeSummary {
    let mut summary = EpisodeSummary {
        planner,
        n_obstacles: scenario.n_obstacles,
        map_index: scenario.map_index,
        map_seed: scenario.map_seed,
        episode_seed: scenario.episode_seed,
        map_hash: None,
        error: None,
        cumulative_reward: 0.0,
        n_steps: 0,
        completed: false,
        failure: false,
        completion_time_s: 0.0,
        planner_runtime_total_s: 0.0,
        planner_runtime_mean_s: 0.0,
        planner_calls: 0,
        policy_steps: 0,
        entropy_initial: 0.0,
        entropy_final: 0.0,
        collisions: 0,
    };
    let (world, targets) = match &scenario.env {
        Ok(env) => env,
        Err(e) => {
            summary.error = Some(e.clone());
            return summary;
        }
    };
    summary.map_hash = Some(world.content_hash());
    let episode = EpisodeConfig {
        seed: scenario.episode_seed,
        planner,
        ..config.episode.clone()
    };
    match run_configured_episode(world, targets, &episode, None) {
        Ok(r) => {
            log::info!(
                "{planner} obstacles={} map={} reward={:.3} steps={} completed={}",
                scenario.n_obstacles,
                scenario.map_index,
                r.cumulative_reward,
                r.n_steps,
                r.completed
            );
            summary.collisions = r.collisions(world, config.episode.mpc.robot_radius);
            summary.cumulative_reward = r.cumulative_reward;
            summary.n_steps = r.n_steps;
            summary.completed = r.completed;
            summary.failure = r.failure;
            summary.completion_time_s = r.completion_time_s;
            summary.planner_runtime_total_s = r.planner_runtime_total_s;
            summary.planner_runtime_mean_s = r.planner_runtime_mean_s;
            summary.planner_calls = r.planner_calls;
            summary.policy_steps = r.policy_steps;
            summary.entropy_initial = r.entropy_initial;
            summary.entropy_final = r.entropy_final;
        }
        Err(e) => summary.error = Some(e.to_string()),
    }
    summary
}

/// Runs every planner on the same generated maps, targets and sensor seeds.
///
/// Map `i` uses seed `base_seed + i` for every obstacle count. Rows are ordered
/// by obstacle count, then planner, then map index, whatever the worker count.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkReport, SimError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| SimError::Config(format!("cannot start worker pool: {e}")))?;
    let episodes = pool.install(|| {
        let scenarios: Vec<Scenario> = config
            .obstacle_counts
            .iter()
            .flat_map(|&c| (0..config.n_maps).map(move |i| (c, i)))
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(c, i)| build_scenario(config, c, i))
            .collect();
        let jobs: Vec<(usize, PlannerKind)> = config
            .obstacle_counts
            .iter()
            .enumerate()
            .flat_map(|(ci, _)| {
                config
                    .planners
                    .iter()
                    .flat_map(move |&p| (0..config.n_maps).map(move |i| (ci * config.n_maps + i, p)))
            })
            .collect();
        jobs.into_par_iter()
            .map(|(s, p)| run_one(config, &scenarios[s], p))
            .collect::<Vec<_>>()
    });
    Ok(BenchmarkReport {
        cells: aggregate(config, &episodes),
        config: config.clone(),
        episodes,
    })
}

impl BenchmarkReport {
    /// Copy with wall-clock fields and the worker count cleared.
    pub fn without_timing(&self) -> Self {
        let mut out = self.clone();
        out.config.workers = 0;
        for e in &mut out.episodes {
            e.planner_runtime_total_s = 0.0;
            e.planner_runtime_mean_s = 0.0;
        }
        for c in &mut out.cells {
            c.runtime_s = 0.0;
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per planner and obstacle count.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for cell in &self.cells {
            w.serialize(cell)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Fixed-width summary table.
    pub fn summary_table(&self) -> String {
        let mut s = format!(
            "{:<8} {:>9} {:>8} {:>16} {:>10} {:>14} {:>12}\n",
            "planner", "obstacles", "episodes", "episode reward", "% failure", "travel time s", "runtime s"
        );
        for c in &self.cells {
            s.push_str(&format!(
                "{:<8} {:>9} {:>8} {:>8.2} ± {:<5.2} {:>10.1} {:>14.1} {:>12.4}\n",
                c.planner.as_str(),
                c.n_obstacles,
                c.episodes,
                c.reward_mean,
                c.reward_std,
                c.failure_pct,
                c.travel_time_s,
                c.runtime_s
            ));
        }
        s
    }
}
