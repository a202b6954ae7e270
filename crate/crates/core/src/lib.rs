//! Information-gathering navigation in unknown 2D environments.
//!
//! The crate is organised bottom-up:
//!
//! - [`world`]: ground-truth maps, random generation, visibility and obstacle constraints
//! - [`belief`]: log-odds target belief, entropy and mutual information
//! - [`dynamics`]: second-order unicycle model
//! - [`mpc`]: single-shooting augmented-Lagrangian trajectory optimizer
//! - [`planners`]: greedy next-best-view, MCTS and expert viewpoint recommenders
//! - [`sim`]: closed-loop episodes, benchmark aggregation and safety audit
//! - [`render`]: SVG/PGM/JSON snapshot export
//! - [`config`]: the full run configuration tree

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod belief;
pub mod config;
pub mod dynamics;
pub mod grid;
pub mod mpc;
pub mod planners;
pub mod render;
pub mod sim;
pub mod world;

pub use belief::{BeliefMap, Observation, SensorModel};
pub use config::RunConfig;
pub use dynamics::{ControlInput, Limits, RobotState};
pub use grid::Grid;
pub use mpc::{MpcConfig, MpcSolution, MpcSolver, SolveStatus};
pub use planners::{Planner, PlannerKind, PlanningContext, ViewpointAction};
pub use sim::{BenchmarkReport, EpisodeConfig, EpisodeResult};
pub use world::{CellIndex, GenConfig, GroundTruthTargets, LinearConstraint, RectObstacle, WorldMap, WorldPoint};

/// Seeded RNG used everywhere a reproducible stream is needed.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Derives an independent sub-seed from a base seed and a stream label.
///
/// Streams for map generation, targets, sensor noise and planners are kept
/// apart so that changing one consumer never shifts another's draws.
pub fn derive_seed(base: u64, stream: &str) -> u64 {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(base.to_le_bytes());
    hasher.update(stream.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn seeded_rng(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}
