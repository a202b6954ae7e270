use serde::{Deserialize, Serialize};

use crate::belief::BeliefMap;
use crate::dynamics::RobotState;
use crate::grid::Grid;
use crate::world::{WorldMap, WorldPoint};

pub const DEFAULT_LOCAL_GRID_SIZE: usize = 32;

/// Input a learned policy would receive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyObservation {
    pub entropy_map: Grid<f64>,
    /// One-hot map of the robot's cell.
    pub indicator: Grid<f64>,
    /// Egocentric obstacle window, `true` = occupied.
    pub local_grid: Grid<bool>,
    pub robot_state: RobotState,
}

/// Heading-aligned `m × m` obstacle window centred on the robot.
///
/// Columns run along the robot's heading and rows to its left. Sample points
/// sit at `(k − (m − 1)/2)·cell_size` in the robot frame; each is looked up in
/// the world grid, and points outside the map count as occupied.
pub fn extract_local_grid(world: &WorldMap, state: &RobotState, m: usize, cell_size: f64) -> Grid<bool> {
    assert!(m >= 1 && cell_size > 0.0, "local grid needs m >= 1 and a positive cell size");
    let (sin, cos) = state.psi.sin_cos();
    let half = (m as f64 - 1.0) / 2.0;
    let mut data = Vec::with_capacity(m * m);
    for i in 0..m {
        let ly = (i as f64 - half) * cell_size;
        for j in 0..m {
            let lx = (j as f64 - half) * cell_size;
            let p = WorldPoint::new(state.x + cos * lx - sin * ly, state.y + sin * lx + cos * ly);
            let occupied = match world.point_to_cell(p) {
                Some(cell) => world.is_blocked(cell),
                None => true,
            };
            data.push(occupied);
        }
    }
    Grid::from_vec(m, m, data)
}

pub fn build_policy_observation(belief: &BeliefMap, world: &WorldMap, state: &RobotState, m: usize, cell_size: f64) -> PolicyObservation {
    let mut indicator = Grid::filled(world.rows(), world.cols(), 0.0);
    if let Some(cell) = world.point_to_cell(state.position()) {
        indicator[cell] = 1.0;
    }
    PolicyObservation {
        entropy_map: belief.entropy_map(),
        indicator,
        local_grid: extract_local_grid(world, state, m, cell_size),
        robot_state: *state,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::init_uniform;
    use crate::world::{CellIndex, RectObstacle};
    use std::f64::consts::PI;

    fn world() -> WorldMap {
        WorldMap::new(
            20.0,
            20.0,
            0.5,
            vec![RectObstacle::new(WorldPoint::new(13.0, 11.0), [1.0, 2.5])],
            WorldPoint::new(10.0, 10.0),
        )
        .unwrap()
    }

    #[test]
    fn empty_window_is_free() {
        let w = WorldMap::empty(20.0, 20.0, 0.5).unwrap();
        let g = extract_local_grid(&w, &RobotState::at_rest(WorldPoint::new(10.0, 10.0), 0.7), 20, 0.5);
        assert!(g.as_slice().iter().all(|&o| !o));
    }

    #[test]
    fn heading_zero_is_a_crop() {
        let w = world();
        let state = RobotState::at_rest(WorldPoint::new(10.1, 9.7), 0.0);
        let m = 16;
        let g = extract_local_grid(&w, &state, m, 0.5);
        for i in 0..m {
            for j in 0..m {
                let p = WorldPoint::new(10.1 + (j as f64 - 7.5) * 0.5, 9.7 + (i as f64 - 7.5) * 0.5);
                let col = (p.x / 0.5).floor() as usize;
                let row = (p.y / 0.5).floor() as usize;
                assert_eq!(g[CellIndex::new(i, j)], w.is_blocked(CellIndex::new(row, col)));
            }
        }
        assert!(g.as_slice().iter().any(|&o| o));
    }

    #[test]
    fn half_turn_rotates_grid() {
        let w = world();
        let m = 20;
        let a = extract_local_grid(&w, &RobotState::at_rest(WorldPoint::new(11.1, 10.35), 0.0), m, 0.5);
        let b = extract_local_grid(&w, &RobotState::at_rest(WorldPoint::new(11.1, 10.35), PI), m, 0.5);
        for i in 0..m {
            for j in 0..m {
                assert_eq!(b[CellIndex::new(i, j)], a[CellIndex::new(m - 1 - i, m - 1 - j)]);
            }
        }
    }

    #[test]
    fn outside_map_is_occupied() {
        let w = WorldMap::empty(20.0, 20.0, 0.5).unwrap();
        let g = extract_local_grid(&w, &RobotState::at_rest(WorldPoint::new(1.0, 1.0), 0.0), 32, 0.5);
        assert!(g[CellIndex::new(0, 0)]);
        assert!(!g[CellIndex::new(31, 31)]);
    }

    #[test]
    fn policy_observation_parts() {
        let w = world();
        let belief = init_uniform(&w);
        let state = RobotState::at_rest(w.start(), 0.0);
        let obs = build_policy_observation(&belief, &w, &state, 32, 0.5);
        assert_eq!(obs.indicator.as_slice().iter().sum::<f64>(), 1.0);
        assert_eq!(obs.local_grid.rows(), 32);
        assert!(obs.entropy_map.same_shape(&obs.indicator));
        for (cell, &h) in obs.entropy_map.iter_cells() {
            assert_eq!(h, if w.is_blocked(cell) { 0.0 } else { 1.0 });
        }
    }
}
