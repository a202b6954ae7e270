//! Shared scenes for the planning benchmarks.

use infoplan::belief::{init_uniform, simulate_observation};
use infoplan::world::{generate_random_environment, sample_targets, GenConfig};
use infoplan::{seeded_rng, BeliefMap, RobotState, SensorModel, WorldMap};

/// A generated map with a partially explored belief and the robot at the start.
pub struct Scene {
    pub world: WorldMap,
    pub belief: BeliefMap,
    pub state: RobotState,
    pub sensor: SensorModel,
    pub d_max: f64,
}

pub fn scene(seed: u64, n_obstacles: usize) -> Scene {
    let world = generate_random_environment(seed, n_obstacles, &GenConfig::default()).expect("benchmark map generates");
    let targets = sample_targets(&world, seed, 0.1);
    let sensor = SensorModel::perfect();
    let d_max = 5.0;
    let mut belief = init_uniform(&world);
    let visible = world.visible_cells(world.start(), d_max).expect("start is free");
    let obs = simulate_observation(&targets, &visible, &sensor, &mut seeded_rng(seed));
    belief.update(&obs, &sensor);
    Scene {
        state: RobotState::at_rest(world.start(), 0.0),
        world,
        belief,
        sensor,
        d_max,
    }
}
