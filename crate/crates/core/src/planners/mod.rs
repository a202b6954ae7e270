//! Viewpoint recommendation strategies.

mod expert;
mod greedy;
mod mcts;
mod observation;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{BeliefMap, SensorModel};
use crate::dynamics::RobotState;
use crate::mpc::{MpcConfig, MpcError};
use crate::world::{WorldMap, WorldPoint};
use crate::SimRng;

pub use expert::{expert_viewpoint, ExpertPlanner};
pub use greedy::{greedy_next_best_view, GreedyConfig, GreedyPlanner};
pub use mcts::{mcts_plan, primitive_rollout, ucb_select, MctsConfig, MctsPlanner, Pose, Primitive};
pub use observation::{build_policy_observation, extract_local_grid, PolicyObservation, DEFAULT_LOCAL_GRID_SIZE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("every root motion primitive collides")]
    NoFeasiblePrimitive,
    #[error(transparent)]
    Mpc(#[from] MpcError),
}

/// Viewpoint offset relative to the robot, inside the square `‖δ‖∞ ≤ δ_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewpointAction {
    pub delta: WorldPoint,
}

impl ViewpointAction {
    pub fn target(&self, position: WorldPoint) -> WorldPoint {
        position + self.delta
    }
}

pub fn clip_action(delta: WorldPoint, delta_max: f64) -> ViewpointAction {
    ViewpointAction {
        delta: WorldPoint::new(delta.x.clamp(-delta_max, delta_max), delta.y.clamp(-delta_max, delta_max)),
    }
}

/// Everything a planner may read when asked for a reference.
#[derive(Clone, Copy, Debug)]
pub struct PlanningContext<'a> {
    pub world: &'a WorldMap,
    pub belief: &'a BeliefMap,
    pub state: &'a RobotState,
    pub sensor: &'a SensorModel,
    pub d_max: f64,
}

pub trait Planner {
    fn name(&self) -> &'static str;

    /// Next viewpoint reference `p_ref` in world coordinates.
    fn recommend(&mut self, ctx: &PlanningContext) -> Result<WorldPoint, PlanError>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Greedy,
    Mcts,
    Expert,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 3] = [PlannerKind::Greedy, PlannerKind::Mcts, PlannerKind::Expert];

    pub fn as_str(&self) -> &'static str {
        match self {
            PlannerKind::Greedy => "greedy",
            PlannerKind::Mcts => "mcts",
            PlannerKind::Expert => "expert",
        }
    }

    pub fn build(&self, settings: &PlannerSettings, mpc: &MpcConfig, seed: u64) -> Result<Box<dyn Planner + Send>, PlanError> {
        Ok(match self {
            PlannerKind::Greedy => Box::new(GreedyPlanner::new(settings.greedy.clone(), seed)),
            PlannerKind::Mcts => Box::new(MctsPlanner::new(settings.mcts.clone(), seed)),
            PlannerKind::Expert => Box::new(ExpertPlanner::new(settings.greedy.clone(), mpc.clone(), seed)?),
        })
    }
}

impl std::fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "greedy" => Ok(PlannerKind::Greedy),
            "mcts" => Ok(PlannerKind::Mcts),
            "expert" => Ok(PlannerKind::Expert),
            other => Err(format!("unknown planner '{other}' (expected greedy, mcts or expert)")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerSettings {
    pub greedy: GreedyConfig,
    pub mcts: MctsConfig,
}

fn rng_for(seed: u64) -> SimRng {
    crate::seeded_rng(seed)
}
