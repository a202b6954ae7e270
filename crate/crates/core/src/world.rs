//! Ground-truth environment: rectangular obstacles on a square-cell grid.
//!
//! Cells are indexed `(row, col)` with rows along +y and columns along +x;
//! cell `(r, c)` covers `[c·res, (c+1)·res) × [r·res, (r+1)·res)`.

use std::collections::VecDeque;
use std::ops::{Add, Mul, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::Grid;
use crate::seeded_rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("no connected environment found after {attempts} attempts")]
    GenerationExhausted { attempts: usize },
    #[error("position ({x:.3}, {y:.3}) is outside the map bounds")]
    OutOfBounds { x: f64, y: f64 },
    #[error("position ({x:.3}, {y:.3}) lies inside an obstacle")]
    InObstacle { x: f64, y: f64 },
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
}

/// A point (or displacement) in the world frame, meters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
}

impl WorldPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }
}

impl Add for WorldPoint {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for WorldPoint {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for WorldPoint {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellIndex {
    pub row: usize,
    pub col: usize,
}

impl CellIndex {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// Axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectObstacle {
    pub center: WorldPoint,
    pub half_extents: [f64; 2],
}

impl RectObstacle {
    pub fn new(center: WorldPoint, half_extents: [f64; 2]) -> Self {
        Self { center, half_extents }
    }

    pub fn min(&self) -> WorldPoint {
        WorldPoint::new(self.center.x - self.half_extents[0], self.center.y - self.half_extents[1])
    }

    pub fn max(&self) -> WorldPoint {
        WorldPoint::new(self.center.x + self.half_extents[0], self.center.y + self.half_extents[1])
    }

    /// Closed containment (boundary counts as inside).
    pub fn contains(&self, p: WorldPoint) -> bool {
        (p.x - self.center.x).abs() <= self.half_extents[0] && (p.y - self.center.y).abs() <= self.half_extents[1]
    }

    /// Strict interior containment.
    pub fn contains_interior(&self, p: WorldPoint) -> bool {
        (p.x - self.center.x).abs() < self.half_extents[0] && (p.y - self.center.y).abs() < self.half_extents[1]
    }

    pub fn closest_point(&self, p: WorldPoint) -> WorldPoint {
        let (lo, hi) = (self.min(), self.max());
        WorldPoint::new(p.x.clamp(lo.x, hi.x), p.y.clamp(lo.y, hi.y))
    }

    /// Euclidean distance from `p` to the rectangle (0 inside).
    pub fn distance(&self, p: WorldPoint) -> f64 {
        let dx = ((p.x - self.center.x).abs() - self.half_extents[0]).max(0.0);
        let dy = ((p.y - self.center.y).abs() - self.half_extents[1]).max(0.0);
        dx.hypot(dy)
    }

    /// Whether segment `pq` passes through the open interior (slab test).
    pub fn segment_hits_interior(&self, p: WorldPoint, q: WorldPoint) -> bool {
        let (lo, hi) = (self.min(), self.max());
        let d = q - p;
        let mut t_lo = 0.0_f64;
        let mut t_hi = 1.0_f64;
        for (origin, dir, min, max) in [(p.x, d.x, lo.x, hi.x), (p.y, d.y, lo.y, hi.y)] {
            if dir == 0.0 {
                if origin <= min || origin >= max {
                    return false;
                }
            } else {
                let a = (min - origin) / dir;
                let b = (max - origin) / dir;
                let (a, b) = if a < b { (a, b) } else { (b, a) };
                t_lo = t_lo.max(a);
                t_hi = t_hi.min(b);
                if t_lo >= t_hi {
                    return false;
                }
            }
        }
        t_lo < t_hi
    }
}

/// Half-plane `normal · p ≤ offset − r` describing the free side of an obstacle.
///
/// `normal` is the unit vector pointing from the free side towards the
/// obstacle, so `offset − normal · p` is the signed distance of `p` to the
/// supporting line (positive on the free side).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub normal: WorldPoint,
    pub offset: f64,
}

impl LinearConstraint {
    pub const UNIT_TOLERANCE: f64 = 1e-9;

    pub fn new(normal: WorldPoint, offset: f64) -> Self {
        Self { normal, offset }
    }

    pub fn has_unit_normal(&self) -> bool {
        (self.normal.norm() - 1.0).abs() <= Self::UNIT_TOLERANCE
    }

    /// Left-hand side `nᵀp`.
    pub fn value(&self, p: WorldPoint) -> f64 {
        self.normal.dot(p)
    }

    pub fn signed_distance(&self, p: WorldPoint) -> f64 {
        self.offset - self.normal.dot(p)
    }

    /// Point-to-line distance `|nᵀp − b| / ‖n‖`.
    pub fn distance(&self, p: WorldPoint) -> f64 {
        (self.normal.dot(p) - self.offset).abs() / self.normal.norm()
    }

    /// Amount by which `p` violates the constraint inflated by `radius`.
    pub fn violation(&self, p: WorldPoint, radius: f64) -> f64 {
        (self.normal.dot(p) - (self.offset - radius)).max(0.0)
    }
}

/// Random environment generator settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub width_m: f64,
    pub height_m: f64,
    pub resolution_m: f64,
    pub half_extent_min: f64,
    pub half_extent_max: f64,
    /// Minimum clearance of the start position to obstacles and bounds.
    pub start_clearance_m: f64,
    pub max_attempts: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            width_m: 20.0,
            height_m: 20.0,
            resolution_m: 0.5,
            half_extent_min: 1.0,
            half_extent_max: 4.0,
            start_clearance_m: 0.5,
            max_attempts: 1000,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |msg: &str| Err(WorldError::InvalidConfig(msg.to_string()));
        if !(self.width_m > 0.0 && self.height_m > 0.0 && self.resolution_m > 0.0) {
            return bad("width_m, height_m and resolution_m must be positive");
        }
        if !(self.half_extent_min > 0.0 && self.half_extent_min <= self.half_extent_max) {
            return bad("half extents must satisfy 0 < half_extent_min <= half_extent_max");
        }
        if 2.0 * self.half_extent_max >= self.width_m.min(self.height_m) {
            return bad("obstacles must be smaller than the map extent");
        }
        if self.start_clearance_m < 0.0 {
            return bad("start_clearance_m must be non-negative");
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be at least 1");
        }
        Ok(())
    }
}

/// Generator inputs echoed into serialized maps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenProvenance {
    pub seed: u64,
    pub n_obstacles: usize,
    pub config: GenConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct WorldMapData {
    width_m: f64,
    height_m: f64,
    resolution_m: f64,
    obstacles: Vec<RectObstacle>,
    start: WorldPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<GenProvenance>,
}

/// Ground-truth environment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WorldMapData", into = "WorldMapData")]
pub struct WorldMap {
    data: WorldMapData,
    rows: usize,
    cols: usize,
    /// Cell centers covered by an obstacle.
    blocked: Grid<bool>,
}

impl TryFrom<WorldMapData> for WorldMap {
    type Error = WorldError;

    fn try_from(data: WorldMapData) -> Result<Self, WorldError> {
        let mut map = WorldMap::new(data.width_m, data.height_m, data.resolution_m, data.obstacles, data.start)?;
        map.data.provenance = data.provenance;
        Ok(map)
    }
}

impl From<WorldMap> for WorldMapData {
    fn from(map: WorldMap) -> Self {
        map.data
    }
}

impl WorldMap {
    pub fn new(
        width_m: f64,
        height_m: f64,
        resolution_m: f64,
        obstacles: Vec<RectObstacle>,
        start: WorldPoint,
    ) -> Result<Self, WorldError> {
        if !(width_m > 0.0 && height_m > 0.0 && resolution_m > 0.0) {
            return Err(WorldError::InvalidMap("extent and resolution must be positive".into()));
        }
        for (i, o) in obstacles.iter().enumerate() {
            if !(o.half_extents[0] > 0.0 && o.half_extents[1] > 0.0) {
                return Err(WorldError::InvalidMap(format!("obstacle {i} has non-positive half extents")));
            }
            let (lo, hi) = (o.min(), o.max());
            if lo.x < 0.0 || lo.y < 0.0 || hi.x > width_m || hi.y > height_m {
                return Err(WorldError::InvalidMap(format!("obstacle {i} exceeds the map bounds")));
            }
        }
        let rows = (height_m / resolution_m).ceil() as usize;
        let cols = (width_m / resolution_m).ceil() as usize;
        let mut blocked = Grid::filled(rows, cols, false);
        for r in 0..rows {
            for c in 0..cols {
                let center = WorldPoint::new((c as f64 + 0.5) * resolution_m, (r as f64 + 0.5) * resolution_m);
                blocked[CellIndex::new(r, c)] = obstacles.iter().any(|o| o.contains(center));
            }
        }
        Ok(Self {
            data: WorldMapData {
                width_m,
                height_m,
                resolution_m,
                obstacles,
                start,
                provenance: None,
            },
            rows,
            cols,
            blocked,
        })
    }

    /// Obstacle-free map with the start at the center.
    pub fn empty(width_m: f64, height_m: f64, resolution_m: f64) -> Result<Self, WorldError> {
        Self::new(width_m, height_m, resolution_m, Vec::new(), WorldPoint::new(width_m / 2.0, height_m / 2.0))
    }

    pub fn with_start(mut self, start: WorldPoint) -> Self {
        self.data.start = start;
        self
    }

    pub fn width_m(&self) -> f64 {
        self.data.width_m
    }

    pub fn height_m(&self) -> f64 {
        self.data.height_m
    }

    pub fn resolution_m(&self) -> f64 {
        self.data.resolution_m
    }

    pub fn obstacles(&self) -> &[RectObstacle] {
        &self.data.obstacles
    }

    pub fn start(&self) -> WorldPoint {
        self.data.start
    }

    pub fn provenance(&self) -> Option<&GenProvenance> {
        self.data.provenance.as_ref()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n_cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn in_bounds(&self, p: WorldPoint) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x <= self.data.width_m && p.y <= self.data.height_m
    }

    /// Cell containing `p`; points on the far boundary map to the last cell.
    pub fn point_to_cell(&self, p: WorldPoint) -> Option<CellIndex> {
        if !self.in_bounds(p) {
            return None;
        }
        let res = self.data.resolution_m;
        let col = ((p.x / res).floor() as usize).min(self.cols - 1);
        let row = ((p.y / res).floor() as usize).min(self.rows - 1);
        Some(CellIndex::new(row, col))
    }

    pub fn cell_center(&self, cell: CellIndex) -> WorldPoint {
        let res = self.data.resolution_m;
        WorldPoint::new((cell.col as f64 + 0.5) * res, (cell.row as f64 + 0.5) * res)
    }

    /// Whether the cell center is covered by an obstacle.
    pub fn is_blocked(&self, cell: CellIndex) -> bool {
        self.blocked[cell]
    }

    pub fn blocked_grid(&self) -> &Grid<bool> {
        &self.blocked
    }

    pub fn point_in_obstacle(&self, p: WorldPoint) -> bool {
        self.data.obstacles.iter().any(|o| o.contains(p))
    }

    /// Free space membership: in bounds and outside every obstacle.
    pub fn is_free_point(&self, p: WorldPoint) -> bool {
        self.in_bounds(p) && !self.point_in_obstacle(p)
    }

    fn check_free(&self, p: WorldPoint) -> Result<(), WorldError> {
        if !self.in_bounds(p) {
            return Err(WorldError::OutOfBounds { x: p.x, y: p.y });
        }
        if self.point_in_obstacle(p) {
            return Err(WorldError::InObstacle { x: p.x, y: p.y });
        }
        Ok(())
    }

    /// Distance to the nearest obstacle or map edge.
    pub fn clearance(&self, p: WorldPoint) -> f64 {
        let edge = p
            .x
            .min(self.data.width_m - p.x)
            .min(p.y)
            .min(self.data.height_m - p.y);
        self.data
            .obstacles
            .iter()
            .map(|o| o.distance(p))
            .fold(edge, f64::min)
    }

    /// Whether a disc of `radius` at `p` overlaps an obstacle.
    pub fn disc_hits_obstacle(&self, p: WorldPoint, radius: f64) -> bool {
        self.data.obstacles.iter().any(|o| o.distance(p) < radius)
    }

    pub fn line_of_sight(&self, p: WorldPoint, q: WorldPoint) -> bool {
        !self.data.obstacles.iter().any(|o| o.segment_hits_interior(p, q))
    }

    /// Free cells whose center is within `d_max` of `position` and visible from it.
    ///
    /// The result is sorted in row-major order.
    pub fn visible_cells(&self, position: WorldPoint, d_max: f64) -> Result<Vec<CellIndex>, WorldError> {
        self.check_free(position)?;
        let mut out = Vec::new();
        if d_max < 0.0 {
            return Ok(out);
        }
        let res = self.data.resolution_m;
        let d2 = d_max * d_max;
        let col_lo = (((position.x - d_max) / res).floor().max(0.0)) as usize;
        let row_lo = (((position.y - d_max) / res).floor().max(0.0)) as usize;
        let col_hi = (((position.x + d_max) / res).ceil() as usize).min(self.cols.saturating_sub(1));
        let row_hi = (((position.y + d_max) / res).ceil() as usize).min(self.rows.saturating_sub(1));
        // Only obstacles that can intersect the sensing disc matter.
        let nearby: Vec<&RectObstacle> = self
            .data
            .obstacles
            .iter()
            .filter(|o| o.distance(position) <= d_max)
            .collect();
        for row in row_lo..=row_hi {
            for col in col_lo..=col_hi {
                let cell = CellIndex::new(row, col);
                if self.blocked[cell] {
                    continue;
                }
                let center = self.cell_center(cell);
                if (center - position).norm_squared() > d2 {
                    continue;
                }
                if nearby.iter().all(|o| !o.segment_hits_interior(position, center)) {
                    out.push(cell);
                }
            }
        }
        Ok(out)
    }

    /// Linearized constraints for the `n_obs` obstacles nearest to `position`.
    ///
    /// Obstacles are ranked by point-to-rectangle distance, ties by index.
    pub fn closest_obstacle_constraints(&self, position: WorldPoint, n_obs: usize) -> Vec<LinearConstraint> {
        let mut ranked: Vec<(f64, usize)> = self
            .data
            .obstacles
            .iter()
            .enumerate()
            .map(|(i, o)| (o.distance(position), i))
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        ranked
            .into_iter()
            .take(n_obs)
            .map(|(_, i)| constraint_for(&self.data.obstacles[i], position))
            .collect()
    }

    /// Half-planes keeping positions inside the map rectangle.
    pub fn boundary_constraints(&self) -> [LinearConstraint; 4] {
        [
            LinearConstraint::new(WorldPoint::new(-1.0, 0.0), 0.0),
            LinearConstraint::new(WorldPoint::new(1.0, 0.0), self.data.width_m),
            LinearConstraint::new(WorldPoint::new(0.0, -1.0), 0.0),
            LinearConstraint::new(WorldPoint::new(0.0, 1.0), self.data.height_m),
        ]
    }

    /// Row-major list of free cells.
    pub fn free_cells(&self) -> Vec<CellIndex> {
        self.blocked
            .iter_cells()
            .filter(|(_, &b)| !b)
            .map(|(c, _)| c)
            .collect()
    }

    pub fn n_free(&self) -> usize {
        self.blocked.as_slice().iter().filter(|&&b| !b).count()
    }

    /// Number of free cells 4-connected to the cell containing `from`.
    pub fn reachable_free_count(&self, from: WorldPoint) -> usize {
        let Some(seed) = self.point_to_cell(from) else {
            return 0;
        };
        if self.blocked[seed] {
            return 0;
        }
        let mut seen = Grid::filled(self.rows, self.cols, false);
        let mut queue = VecDeque::from([seed]);
        seen[seed] = true;
        let mut count = 0;
        while let Some(c) = queue.pop_front() {
            count += 1;
            let neighbours = [
                (c.row.wrapping_sub(1), c.col),
                (c.row + 1, c.col),
                (c.row, c.col.wrapping_sub(1)),
                (c.row, c.col + 1),
            ];
            for (r, col) in neighbours {
                if r >= self.rows || col >= self.cols {
                    continue;
                }
                let n = CellIndex::new(r, col);
                if !seen[n] && !self.blocked[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.reachable_free_count(self.data.start) == self.n_free()
    }

    /// Stable content hash of the serialized map (hex SHA-256).
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let bytes = serde_json::to_vec(self).expect("world map serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

fn constraint_for(obstacle: &RectObstacle, p: WorldPoint) -> LinearConstraint {
    let closest = obstacle.closest_point(p);
    let d = closest - p;
    let dist = d.norm();
    if dist > 0.0 {
        let normal = d * (1.0 / dist);
        return LinearConstraint::new(normal, normal.dot(closest));
    }
    // Inside (or on the boundary): push out through the nearest face.
    let (lo, hi) = (obstacle.min(), obstacle.max());
    let faces = [
        (p.x - lo.x, WorldPoint::new(1.0, 0.0), WorldPoint::new(lo.x, p.y)),
        (hi.x - p.x, WorldPoint::new(-1.0, 0.0), WorldPoint::new(hi.x, p.y)),
        (p.y - lo.y, WorldPoint::new(0.0, 1.0), WorldPoint::new(p.x, lo.y)),
        (hi.y - p.y, WorldPoint::new(0.0, -1.0), WorldPoint::new(p.x, hi.y)),
    ];
    let (_, normal, on_face) = faces
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("four faces");
    LinearConstraint::new(normal, normal.dot(on_face))
}

/// Samples a connected random environment with exactly `n_obstacles` rectangles.
///
/// Candidate layouts whose free space is not a single 4-connected component
/// reachable from the sampled start cell are rejected and redrawn.
pub fn generate_random_environment(seed: u64, n_obstacles: usize, config: &GenConfig) -> Result<WorldMap, WorldError> {
    config.validate()?;
    let mut rng = seeded_rng(seed);
    for _ in 0..config.max_attempts {
        let obstacles: Vec<RectObstacle> = (0..n_obstacles)
            .map(|_| {
                let hx = rng.gen_range(config.half_extent_min..=config.half_extent_max);
                let hy = rng.gen_range(config.half_extent_min..=config.half_extent_max);
                let cx = rng.gen_range(hx..=config.width_m - hx);
                let cy = rng.gen_range(hy..=config.height_m - hy);
                RectObstacle::new(WorldPoint::new(cx, cy), [hx, hy])
            })
            .collect();
        let map = WorldMap::new(config.width_m, config.height_m, config.resolution_m, obstacles, WorldPoint::default())?;
        let starts: Vec<CellIndex> = map
            .free_cells()
            .into_iter()
            .filter(|&c| map.clearance(map.cell_center(c)) >= config.start_clearance_m)
            .collect();
        if starts.is_empty() {
            continue;
        }
        let start = map.cell_center(starts[rng.gen_range(0..starts.len())]);
        let mut map = map.with_start(start);
        if map.is_connected() {
            map.data.provenance = Some(GenProvenance {
                seed,
                n_obstacles,
                config: config.clone(),
            });
            return Ok(map);
        }
    }
    Err(WorldError::GenerationExhausted {
        attempts: config.max_attempts,
    })
}

/// Hidden target realization over the free cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthTargets {
    pub occupied: Grid<bool>,
}

impl GroundTruthTargets {
    pub fn none(map: &WorldMap) -> Self {
        Self {
            occupied: Grid::filled(map.rows(), map.cols(), false),
        }
    }

    pub fn from_cells(map: &WorldMap, cells: &[CellIndex]) -> Result<Self, WorldError> {
        let mut t = Self::none(map);
        for &c in cells {
            if c.row >= map.rows() || c.col >= map.cols() {
                return Err(WorldError::InvalidMap(format!("target cell {c:?} outside the grid")));
            }
            if map.is_blocked(c) {
                return Err(WorldError::InvalidMap(format!("target cell {c:?} lies in an obstacle")));
            }
            t.occupied[c] = true;
        }
        Ok(t)
    }

    pub fn is_target(&self, cell: CellIndex) -> bool {
        self.occupied[cell]
    }

    pub fn cells(&self) -> Vec<CellIndex> {
        self.occupied.iter_cells().filter(|(_, &o)| o).map(|(c, _)| c).collect()
    }

    pub fn count(&self) -> usize {
        self.occupied.as_slice().iter().filter(|&&o| o).count()
    }
}

/// Independently marks each free cell as a target with probability `density`.
pub fn sample_targets(map: &WorldMap, seed: u64, density: f64) -> GroundTruthTargets {
    let density = density.clamp(0.0, 1.0);
    let mut rng = seeded_rng(seed);
    let mut targets = GroundTruthTargets::none(map);
    for cell in map.free_cells() {
        targets.occupied[cell] = rng.gen::<f64>() < density;
    }
    targets
}

/// On-disk map: geometry, start, target cells and generator provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapFile {
    pub world: WorldMap,
    pub targets: Vec<CellIndex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_density: Option<f64>,
}

impl MapFile {
    pub fn new(world: WorldMap, targets: &GroundTruthTargets) -> Self {
        Self {
            targets: targets.cells(),
            world,
            target_seed: None,
            target_density: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, WorldError> {
        serde_json::from_str(text).map_err(|e| WorldError::InvalidMap(e.to_string()))
    }

    pub fn targets(&self) -> Result<GroundTruthTargets, WorldError> {
        GroundTruthTargets::from_cells(&self.world, &self.targets)
    }
}
