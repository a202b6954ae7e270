use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{rng_for, PlanError, Planner, PlanningContext};
use crate::belief::{BeliefMap, SensorModel};
use crate::world::{WorldMap, WorldPoint};
use crate::SimRng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GreedyConfig {
    pub n_candidates: usize,
    pub delta_max: f64,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        Self {
            n_candidates: 30,
            delta_max: 4.0,
        }
    }
}

/// Samples candidate viewpoints in the action square and returns the most informative one.
///
/// Candidates outside the map or inside obstacles are discarded; ties go to the
/// earliest sample. Without any valid candidate the current position is returned.
pub fn greedy_next_best_view<R: Rng + ?Sized>(
    belief: &BeliefMap,
    world: &WorldMap,
    position: WorldPoint,
    sensor: &SensorModel,
    d_max: f64,
    config: &GreedyConfig,
    rng: &mut R,
) -> WorldPoint {
    let mut best: Option<(f64, WorldPoint)> = None;
    for _ in 0..config.n_candidates {
        let dx = rng.gen_range(-config.delta_max..=config.delta_max);
        let dy = rng.gen_range(-config.delta_max..=config.delta_max);
        let candidate = position + WorldPoint::new(dx, dy);
        let Ok(visible) = world.visible_cells(candidate, d_max) else {
            continue;
        };
        let score = belief.expected_mutual_information(&visible, sensor);
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, candidate));
        }
    }
    best.map_or(position, |(_, p)| p)
}

pub struct GreedyPlanner {
    pub config: GreedyConfig,
    rng: SimRng,
}

impl GreedyPlanner {
    pub fn new(config: GreedyConfig, seed: u64) -> Self {
        Self {
            config,
            rng: rng_for(seed),
        }
    }
}

impl Planner for GreedyPlanner {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn recommend(&mut self, ctx: &PlanningContext) -> Result<WorldPoint, PlanError> {
        Ok(greedy_next_best_view(
            ctx.belief,
            ctx.world,
            ctx.state.position(),
            ctx.sensor,
            ctx.d_max,
            &self.config,
            &mut self.rng,
        ))
    }
}
