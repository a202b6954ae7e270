use rand::Rng;

use super::{clip_action, greedy_next_best_view, rng_for, GreedyConfig, PlanError, Planner, PlanningContext, ViewpointAction};
use crate::belief::{BeliefMap, SensorModel};
use crate::dynamics::RobotState;
use crate::mpc::{collect_constraints, MpcSolver};
use crate::world::{WorldMap, WorldPoint};
use crate::SimRng;

/// Greedy target refined through the MPC: the predicted terminal position relative to the robot.
#[allow(clippy::too_many_arguments)]
pub fn expert_viewpoint<R: Rng + ?Sized>(
    belief: &BeliefMap,
    world: &WorldMap,
    state: &RobotState,
    solver: &MpcSolver,
    sensor: &SensorModel,
    d_max: f64,
    greedy: &GreedyConfig,
    rng: &mut R,
) -> Result<ViewpointAction, PlanError> {
    let position = state.position();
    let target = greedy_next_best_view(belief, world, position, sensor, d_max, greedy, rng);
    let constraints = collect_constraints(world, position, &solver.config);
    let solution = solver.solve(state, target, &constraints, None)?;
    Ok(clip_action(solution.terminal_position() - position, greedy.delta_max))
}

pub struct ExpertPlanner {
    pub greedy: GreedyConfig,
    solver: MpcSolver,
    rng: SimRng,
}

impl ExpertPlanner {
    pub fn new(greedy: GreedyConfig, mpc: crate::mpc::MpcConfig, seed: u64) -> Result<Self, PlanError> {
        Ok(Self {
            greedy,
            solver: MpcSolver::new(mpc)?,
            rng: rng_for(seed),
        })
    }
}

impl Planner for ExpertPlanner {
    fn name(&self) -> &'static str {
        "expert"
    }

    fn recommend(&mut self, ctx: &PlanningContext) -> Result<WorldPoint, PlanError> {
        let action = expert_viewpoint(
            ctx.belief,
            ctx.world,
            ctx.state,
            &self.solver,
            ctx.sensor,
            ctx.d_max,
            &self.greedy,
            &mut self.rng,
        )?;
        Ok(action.target(ctx.state.position()))
    }
}
