//! Monte Carlo tree search over first-order motion primitives.
//!
//! A node's return is the sum of expected mutual information at the end pose
//! of every primitive below it, each scored against a belief copy that has
//! already absorbed the most likely readings at the earlier poses. Revisiting
//! explored ground is therefore worth little.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{rng_for, PlanError, Planner, PlanningContext};
use crate::belief::{BeliefMap, SensorModel};
use crate::dynamics::{wrap_angle, RobotState};
use crate::world::{CellIndex, WorldMap, WorldPoint};
use crate::SimRng;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, psi: f64) -> Self {
        Self { x, y, psi }
    }

    pub fn position(&self) -> WorldPoint {
        WorldPoint::new(self.x, self.y)
    }
}

impl From<&RobotState> for Pose {
    fn from(s: &RobotState) -> Self {
        Pose::new(s.x, s.y, s.psi)
    }
}

/// Constant speed and turn rate held for one primitive duration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub speed: f64,
    pub turn_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MctsConfig {
    pub n_tree: usize,
    pub n_sim: usize,
    pub depth: usize,
    /// Seconds each primitive is held.
    pub primitive_duration: f64,
    /// Sampling step along a primitive for collision checks.
    pub dt: f64,
    pub speeds: Vec<f64>,
    pub turn_rates: Vec<f64>,
    pub ucb_c: f64,
    /// Per-level reward discount inside a plan; 1 disables discounting.
    pub discount: f64,
    /// Minimum distance from obstacles and map edges along primitive paths, meters.
    pub clearance: f64,
}

impl Default for MctsConfig {
    fn default() -> Self {
        Self {
            n_tree: 100,
            n_sim: 10,
            depth: 4,
            primitive_duration: 1.2,
            dt: 0.1,
            speeds: vec![0.0, 1.0, 3.0],
            turn_rates: vec![-PI / 4.0, -PI / 10.0, 0.0, PI / 10.0, PI / 4.0],
            ucb_c: 2.0,
            discount: 1.0,
            clearance: 0.5,
        }
    }
}

impl MctsConfig {
    /// Speed-major product of the speed and turn-rate sets.
    pub fn primitives(&self) -> Vec<Primitive> {
        self.speeds
            .iter()
            .flat_map(|&speed| self.turn_rates.iter().map(move |&turn_rate| Primitive { speed, turn_rate }))
            .collect()
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n_tree == 0 || self.n_sim == 0 || self.depth == 0 {
            return Err("n_tree, n_sim and depth must be at least 1".into());
        }
        if !(self.primitive_duration > 0.0 && self.dt > 0.0) {
            return Err("primitive_duration and dt must be positive".into());
        }
        if self.speeds.is_empty() || self.turn_rates.is_empty() {
            return Err("speeds and turn_rates must be non-empty".into());
        }
        if !(self.ucb_c >= 0.0 && self.discount > 0.0 && self.clearance >= 0.0) {
            return Err("ucb_c and clearance must be non-negative, discount positive".into());
        }
        Ok(())
    }
}

/// Poses along a primitive at multiples of `dt`, ending exactly at `duration`.
///
/// The start pose is not included.
pub fn primitive_rollout(pose: Pose, primitive: Primitive, duration: f64, dt: f64) -> Vec<Pose> {
    assert!(dt > 0.0, "dt must be positive");
    let steps = ((duration / dt) - 1e-9).ceil().max(1.0) as usize;
    let (v, w) = (primitive.speed, primitive.turn_rate);
    (1..=steps)
        .map(|k| {
            let t = (k as f64 * dt).min(duration);
            let (x, y) = if w.abs() > 1e-12 {
                let psi_t = pose.psi + w * t;
                (
                    pose.x + v / w * (psi_t.sin() - pose.psi.sin()),
                    pose.y - v / w * (psi_t.cos() - pose.psi.cos()),
                )
            } else {
                (pose.x + v * t * pose.psi.cos(), pose.y + v * t * pose.psi.sin())
            };
            Pose::new(x, y, wrap_angle(pose.psi + w * t))
        })
        .collect()
}

/// UCB1 choice among children given `(visits, value_sum)` statistics.
///
/// Unvisited children are taken first in index order. Child means are rescaled
/// to `[0, 1]` by their minimum and maximum before the exploration bonus is
/// added; equal means all map to zero.
pub fn ucb_select(stats: &[(u32, f64)], parent_visits: u32, c: f64) -> usize {
    if let Some(i) = stats.iter().position(|&(n, _)| n == 0) {
        return i;
    }
    let means: Vec<f64> = stats.iter().map(|&(n, sum)| sum / n as f64).collect();
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let ln_parent = (parent_visits.max(1) as f64).ln();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, (&(n, _), &mean)) in stats.iter().zip(&means).enumerate() {
        let exploit = if range > 0.0 { (mean - lo) / range } else { 0.0 };
        let score = exploit + c * (ln_parent / n as f64).sqrt();
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    best
}

struct Node {
    pose: Pose,
    depth: usize,
    reward: f64,
    visible: Vec<CellIndex>,
    /// Feasible primitive indices and the child created for each, if any.
    children: Vec<(usize, Option<usize>)>,
    visits: u32,
    value_sum: f64,
}

struct Search<'a> {
    world: &'a WorldMap,
    sensor: &'a SensorModel,
    d_max: f64,
    config: &'a MctsConfig,
    primitives: Vec<Primitive>,
}

impl Search<'_> {
    fn pose_ok(&self, p: &Pose) -> bool {
        let q = p.position();
        self.world.in_bounds(q) && !self.world.point_in_obstacle(q) && self.world.clearance(q) >= self.config.clearance
    }

    /// End pose of primitive `i` from `pose`, or `None` if its path collides.
    fn end_pose(&self, pose: Pose, i: usize) -> Option<Pose> {
        let path = primitive_rollout(pose, self.primitives[i], self.config.primitive_duration, self.config.dt);
        path.iter().all(|p| self.pose_ok(p)).then(|| *path.last().unwrap())
    }

    fn feasible(&self, pose: Pose) -> Vec<(usize, Pose)> {
        (0..self.primitives.len())
            .filter_map(|i| self.end_pose(pose, i).map(|p| (i, p)))
            .collect()
    }

    fn weight(&self, depth: usize) -> f64 {
        self.config.discount.powi(depth as i32 - 1)
    }

    /// Scores a visit at `pose` and folds its likely readings into `belief`.
    fn visit(&self, belief: &mut BeliefMap, pose: Pose) -> (f64, Vec<CellIndex>) {
        let visible = self.world.visible_cells(pose.position(), self.d_max).unwrap_or_default();
        let gain = belief.expected_mutual_information(&visible, self.sensor);
        belief.assume_likely_observation(&visible, self.sensor);
        (gain, visible)
    }

    fn random_rollout(&self, mut belief: BeliefMap, mut pose: Pose, mut depth: usize, rng: &mut SimRng) -> f64 {
        let mut total = 0.0;
        while depth < self.config.depth {
            let options = self.feasible(pose);
            let Some(&(_, next)) = options.choose(rng) else {
                break;
            };
            depth += 1;
            let (gain, _) = self.visit(&mut belief, next);
            total += self.weight(depth) * gain;
            pose = next;
        }
        total
    }
}

/// Runs the tree search and returns the end position of the best root primitive.
pub fn mcts_plan(
    belief: &BeliefMap,
    world: &WorldMap,
    state: &RobotState,
    sensor: &SensorModel,
    d_max: f64,
    config: &MctsConfig,
    rng: &mut SimRng,
) -> Result<WorldPoint, PlanError> {
    let search = Search {
        world,
        sensor,
        d_max,
        config,
        primitives: config.primitives(),
    };
    let root_pose = Pose::from(state);
    let root_children: Vec<(usize, Option<usize>)> = search.feasible(root_pose).into_iter().map(|(i, _)| (i, None)).collect();
    if root_children.is_empty() {
        return Err(PlanError::NoFeasiblePrimitive);
    }
    let mut nodes = vec![Node {
        pose: root_pose,
        depth: 0,
        reward: 0.0,
        visible: Vec::new(),
        children: root_children,
        visits: 0,
        value_sum: 0.0,
    }];

    for _ in 0..config.n_tree {
        let mut scratch = belief.clone();
        let mut path = vec![0usize];
        let mut current = 0usize;

        // Selection through fully expanded nodes.
        loop {
            let node = &nodes[current];
            if node.depth >= config.depth || node.children.is_empty() || node.children.iter().any(|(_, c)| c.is_none()) {
                break;
            }
            let stats: Vec<(u32, f64)> = node
                .children
                .iter()
                .map(|(_, c)| {
                    let child = &nodes[c.unwrap()];
                    (child.visits, child.value_sum)
                })
                .collect();
            let pick = ucb_select(&stats, node.visits, config.ucb_c);
            current = node.children[pick].1.unwrap();
            scratch.assume_likely_observation(&nodes[current].visible, sensor);
            path.push(current);
        }

        // Expansion of the first untried primitive.
        let node = &nodes[current];
        if node.depth < config.depth {
            if let Some(slot) = node.children.iter().position(|(_, c)| c.is_none()) {
                let prim = node.children[slot].0;
                let depth = node.depth + 1;
                let pose = search.end_pose(node.pose, prim).expect("feasible primitive");
                let (gain, visible) = search.visit(&mut scratch, pose);
                let children = if depth < config.depth {
                    search.feasible(pose).into_iter().map(|(i, _)| (i, None)).collect()
                } else {
                    Vec::new()
                };
                nodes.push(Node {
                    pose,
                    depth,
                    reward: search.weight(depth) * gain,
                    visible,
                    children,
                    visits: 0,
                    value_sum: 0.0,
                });
                let id = nodes.len() - 1;
                nodes[current].children[slot].1 = Some(id);
                current = id;
                path.push(id);
            }
        }

        // Simulation.
        let leaf = &nodes[current];
        let rollout_value = if leaf.depth < config.depth {
            let total: f64 = (0..config.n_sim)
                .map(|_| search.random_rollout(scratch.clone(), leaf.pose, leaf.depth, rng))
                .sum();
            total / config.n_sim as f64
        } else {
            0.0
        };

        // Backpropagation: each node is credited with its own reward and everything below.
        let mut ret = rollout_value;
        for &id in path.iter().rev() {
            ret += nodes[id].reward;
            nodes[id].visits += 1;
            nodes[id].value_sum += ret;
        }
    }

    // Follow the best plan past in-place rotations so the reference moves.
    let mut id = best_child(&nodes, 0).ok_or(PlanError::NoFeasiblePrimitive)?;
    let first = id;
    while nodes[id].pose.position().distance(root_pose.position()) <= 1e-9 {
        match best_child(&nodes, id) {
            Some(next) => id = next,
            None => return Ok(nodes[first].pose.position()),
        }
    }
    Ok(nodes[id].pose.position())
}

/// Visited child with the highest mean value; ties go to the earliest primitive.
fn best_child(nodes: &[Node], id: usize) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for &(_, child) in &nodes[id].children {
        let Some(c) = child else { continue };
        let n = &nodes[c];
        if n.visits == 0 {
            continue;
        }
        let mean = n.value_sum / n.visits as f64;
        if best.is_none_or(|(m, _)| mean > m) {
            best = Some((mean, c));
        }
    }
    best.map(|(_, c)| c)
}

pub struct MctsPlanner {
    pub config: MctsConfig,
    rng: SimRng,
}

impl MctsPlanner {
    pub fn new(config: MctsConfig, seed: u64) -> Self {
        Self {
            config,
            rng: rng_for(seed),
        }
    }
}

impl Planner for MctsPlanner {
    fn name(&self) -> &'static str {
        "mcts"
    }

    fn recommend(&mut self, ctx: &PlanningContext) -> Result<WorldPoint, PlanError> {
        mcts_plan(ctx.belief, ctx.world, ctx.state, ctx.sensor, ctx.d_max, &self.config, &mut self.rng)
    }
}
