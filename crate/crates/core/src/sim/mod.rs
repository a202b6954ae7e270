//! Closed-loop episodes and paired benchmarks.
//!
//! Each timestep observes at the current position, asks the planner for a
//! new reference every `n_a` steps, then applies the first MPC input. A policy
//! step earns the realized information gain of its `n_a` timesteps plus the
//! step penalty.

mod benchmark;

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{coverage_reached, init_uniform, simulate_observation, BeliefError, BeliefMap, SensorModel};
use crate::dynamics::{self, RobotState};
use crate::grid::Grid;
use crate::mpc::{collect_constraints, MpcConfig, MpcError, MpcSolver, SolveStatus, TraceRecord};
use crate::planners::{Planner, PlannerKind, PlannerSettings, PlanningContext};
use crate::world::{GroundTruthTargets, WorldError, WorldMap, WorldPoint};
use crate::{derive_seed, seeded_rng};

pub use benchmark::{episode_seed, make_environment, run_benchmark, BenchmarkCell, BenchmarkConfig, BenchmarkReport, EpisodeSummary};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid episode configuration: {0}")]
    Config(String),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Mpc(#[from] MpcError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    /// Fraction of the initial free-space entropy to remove.
    pub beta: f64,
    pub t_max: usize,
    /// Timesteps between planner calls.
    pub n_a: usize,
    pub r_pen: f64,
    pub seed: u64,
    pub sensor: SensorModel,
    /// Sensing range, meters.
    pub d_max: f64,
    pub planner: PlannerKind,
    pub planners: PlannerSettings,
    pub mpc: MpcConfig,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            beta: 0.9,
            t_max: 640,
            n_a: 5,
            r_pen: -0.1,
            seed: 0,
            sensor: SensorModel::default(),
            d_max: 5.0,
            planner: PlannerKind::Greedy,
            planners: PlannerSettings::default(),
            mpc: MpcConfig::default(),
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if !(0.0..1.0).contains(&self.beta) {
            return bad(format!("beta must lie in [0, 1), got {}", self.beta));
        }
        if self.t_max == 0 || self.n_a == 0 {
            return bad("t_max and n_a must be at least 1".into());
        }
        if !(self.d_max >= 0.0) {
            return bad("d_max must be non-negative".into());
        }
        if !self.r_pen.is_finite() {
            return bad("r_pen must be finite".into());
        }
        self.sensor.validate()?;
        self.mpc.validate()?;
        self.planners.mcts.validate().map_err(SimError::Config)?;
        if self.planners.greedy.delta_max < 0.0 {
            return bad("greedy delta_max must be non-negative".into());
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.mpc.dt
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    /// State at which the observation of step `t` was taken.
    pub state: RobotState,
    pub p_ref: WorldPoint,
    pub info_gain: f64,
    /// Free-space entropy after the observation, bits.
    pub entropy_remaining: f64,
    pub mpc_status: SolveStatus,
}

/// Solver iterations of the MPC solve at timestep `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub t: usize,
    pub records: Vec<TraceRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub planner: String,
    pub seed: u64,
    pub cumulative_reward: f64,
    pub n_steps: usize,
    pub completed: bool,
    pub failure: bool,
    pub completion_time_s: f64,
    pub planner_runtime_total_s: f64,
    pub planner_runtime_mean_s: f64,
    pub planner_calls: usize,
    pub planner_fallbacks: usize,
    pub policy_steps: usize,
    pub policy_rewards: Vec<f64>,
    pub n_free: usize,
    pub entropy_initial: f64,
    pub entropy_final: f64,
    pub final_state: RobotState,
    /// Target probability per cell after the last observation.
    pub final_belief: Grid<f64>,
    pub step_log: Vec<StepRecord>,
    /// Present only when solver tracing is enabled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mpc_trace: Option<Vec<SolveTrace>>,
}

impl EpisodeResult {
    pub fn entropy_reduction(&self) -> f64 {
        self.entropy_initial - self.entropy_final
    }

    /// Copy with wall-clock fields zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            planner_runtime_total_s: 0.0,
            planner_runtime_mean_s: 0.0,
            ..self.clone()
        }
    }

    /// Visited positions, including the state reached after the last step.
    pub fn trajectory(&self) -> Vec<WorldPoint> {
        self.step_log
            .iter()
            .map(|r| r.state.position())
            .chain(std::iter::once(self.final_state.position()))
            .collect()
    }

    pub fn collisions(&self, world: &WorldMap, robot_radius: f64) -> usize {
        safety_audit(&self.step_log, world, robot_radius) + usize::from(world.disc_hits_obstacle(self.final_state.position(), robot_radius))
    }
}

/// Number of logged states whose robot disc overlaps an obstacle.
pub fn safety_audit(step_log: &[StepRecord], world: &WorldMap, robot_radius: f64) -> usize {
    step_log
        .iter()
        .filter(|r| world.disc_hits_obstacle(r.state.position(), robot_radius))
        .count()
}

/// Snapshot handed to an episode observer at the start of every timestep.
pub struct Frame<'a> {
    pub t: usize,
    pub world: &'a WorldMap,
    pub belief: &'a BeliefMap,
    pub state: &'a RobotState,
    pub p_ref: Option<WorldPoint>,
    pub trajectory: &'a [WorldPoint],
}

/// Runs one episode of `planner` on a fixed world and target layout.
///
/// `observer` sees the state before each timestep's observation.
pub fn run_episode(
    world: &WorldMap,
    targets: &GroundTruthTargets,
    planner: &mut dyn Planner,
    config: &EpisodeConfig,
    mut observer: Option<&mut dyn FnMut(&Frame)>,
) -> Result<EpisodeResult, SimError> {
    config.validate()?;
    let solver = MpcSolver::new(config.mpc.clone())?;
    let free = world.free_cells();
    let mut belief = init_uniform(world);
    let mut sensor_rng = seeded_rng(derive_seed(config.seed, "sensor"));
    let heading = seeded_rng(derive_seed(config.seed, "heading")).gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    let mut state = RobotState::at_rest(world.start(), heading);

    let entropy_initial = belief.entropy_over(&free);
    let mut entropy = entropy_initial;
    let mut p_ref: Option<WorldPoint> = None;
    let mut warm: Option<Vec<dynamics::ControlInput>> = None;
    let mut policy_rewards: Vec<f64> = Vec::new();
    let mut step_log = Vec::new();
    let mut mpc_trace = config.mpc.solver.trace.then(Vec::new);
    let mut trajectory = vec![state.position()];
    let mut runtime_total = 0.0;
    let mut calls = 0;
    let mut fallbacks = 0;
    let mut t = 0;
    let completed = loop {
        if let Some(obs) = observer.as_mut() {
            obs(&Frame {
                t,
                world,
                belief: &belief,
                state: &state,
                p_ref,
                trajectory: &trajectory,
            });
        }

        let visible = world.visible_cells(state.position(), config.d_max).unwrap_or_default();
        let reading = simulate_observation(targets, &visible, &config.sensor, &mut sensor_rng);
        belief.update(&reading, &config.sensor);
        let entropy_after = belief.entropy_over(&free);
        let gain = entropy - entropy_after;
        entropy = entropy_after;

        if t % config.n_a == 0 {
            let ctx = PlanningContext {
                world,
                belief: &belief,
                state: &state,
                sensor: &config.sensor,
                d_max: config.d_max,
            };
            let started = Instant::now();
            let recommended = planner.recommend(&ctx);
            runtime_total += started.elapsed().as_secs_f64();
            calls += 1;
            p_ref = Some(match recommended {
                Ok(p) => p,
                Err(e) => {
                    log::debug!("planner {} fell back to the current position at t={t}: {e}", planner.name());
                    fallbacks += 1;
                    state.position()
                }
            });
            policy_rewards.push(config.r_pen);
        }
        *policy_rewards.last_mut().expect("planned at t = 0") += gain;

        let target = p_ref.expect("planned at t = 0");
        let constraints = collect_constraints(world, state.position(), &config.mpc);
        let mut solution = solver.solve(&state, target, &constraints, warm.as_deref())?;
        if let (Some(traces), Some(records)) = (mpc_trace.as_mut(), solution.trace.take()) {
            traces.push(SolveTrace { t, records });
        }
        step_log.push(StepRecord {
            t,
            state,
            p_ref: target,
            info_gain: gain,
            entropy_remaining: entropy,
            mpc_status: solution.status,
        });
        state = dynamics::step(&state, &solution.inputs[0], config.dt(), &config.mpc.limits);
        trajectory.push(state.position());
        warm = Some(solution.inputs);
        t += 1;

        if coverage_reached(&belief, &free, config.beta) {
            break true;
        }
        if t >= config.t_max {
            break false;
        }
    };

    let n_calls = calls.max(1) as f64;
    Ok(EpisodeResult {
        planner: planner.name().to_string(),
        seed: config.seed,
        cumulative_reward: policy_rewards.iter().sum(),
        n_steps: t,
        completed,
        failure: !completed,
        completion_time_s: t as f64 * config.dt(),
        planner_runtime_total_s: runtime_total,
        planner_runtime_mean_s: runtime_total / n_calls,
        planner_calls: calls,
        planner_fallbacks: fallbacks,
        policy_steps: policy_rewards.len(),
        policy_rewards,
        n_free: free.len(),
        entropy_initial,
        entropy_final: entropy,
        final_state: state,
        final_belief: belief.probability_grid(),
        step_log,
        mpc_trace,
    })
}

/// Builds the configured planner (seeded from the episode seed) and runs the episode.
pub fn run_configured_episode(
    world: &WorldMap,
    targets: &GroundTruthTargets,
    config: &EpisodeConfig,
    observer: Option<&mut dyn FnMut(&Frame)>,
) -> Result<EpisodeResult, SimError> {
    config.validate()?;
    let mut planner = config
        .planner
        .build(&config.planners, &config.mpc, derive_seed(config.seed, "planner"))
        .map_err(|e| SimError::Config(e.to_string()))?;
    run_episode(world, targets, planner.as_mut(), config, observer)
}
