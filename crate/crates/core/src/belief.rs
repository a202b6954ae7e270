//! Target-occupancy belief kept as per-cell log-odds.
//!
//! Log-odds are clamped to `±l_clamp`. A cell sitting exactly on the clamp is
//! treated as resolved: its entropy and mutual information are zero. Without
//! this a perfect sensor could never drive the map entropy to zero and the
//! coverage criterion would be unreachable for β close to one.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::Grid;
use crate::world::{CellIndex, GroundTruthTargets, WorldMap};

/// `logit(0.999)`.
pub const DEFAULT_LOG_ODDS_CLAMP: f64 = 6.906_754_778_648_553;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeliefError {
    #[error("belief grids have different shapes ({0}x{1} vs {2}x{3})")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("invalid sensor model: {0}")]
    InvalidSensor(String),
}

/// Binary detection channel `P(z=1 | m)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    /// `P(z=1 | m=1)`
    pub p_hit: f64,
    /// `P(z=1 | m=0)`
    pub p_false: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self::perfect()
    }
}

impl SensorModel {
    pub fn new(p_hit: f64, p_false: f64) -> Result<Self, BeliefError> {
        let s = Self { p_hit, p_false };
        s.validate()?;
        Ok(s)
    }

    pub const fn perfect() -> Self {
        Self { p_hit: 1.0, p_false: 0.0 }
    }

    pub fn validate(&self) -> Result<(), BeliefError> {
        if !(0.0 <= self.p_false && self.p_false < self.p_hit && self.p_hit <= 1.0) {
            return Err(BeliefError::InvalidSensor(format!(
                "need 0 <= p_false < p_hit <= 1, got p_hit={}, p_false={}",
                self.p_hit, self.p_false
            )));
        }
        Ok(())
    }

    pub fn is_perfect(&self) -> bool {
        self.p_hit == 1.0 && self.p_false == 0.0
    }

    /// Inverse sensor model: log-odds increment for reading `z`.
    ///
    /// May be `±∞` for a perfect sensor; the belief clamps the sum.
    pub fn log_odds_increment(&self, z: bool) -> f64 {
        if z {
            (self.p_hit / self.p_false).ln()
        } else {
            ((1.0 - self.p_hit) / (1.0 - self.p_false)).ln()
        }
    }

    /// `P(z=1)` for a cell with target probability `p`.
    pub fn detection_probability(&self, p: f64) -> f64 {
        p * self.p_hit + (1.0 - p) * self.p_false
    }
}

/// One reading per visible cell.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub readings: Vec<(CellIndex, bool)>,
}

impl Observation {
    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }
}

/// Samples the sensor at every visible cell against the ground truth.
pub fn simulate_observation<R: Rng + ?Sized>(
    targets: &GroundTruthTargets,
    visible: &[CellIndex],
    sensor: &SensorModel,
    rng: &mut R,
) -> Observation {
    let readings = visible
        .iter()
        .map(|&cell| {
            let p = if targets.is_target(cell) { sensor.p_hit } else { sensor.p_false };
            (cell, rng.gen::<f64>() < p)
        })
        .collect();
    Observation { readings }
}

/// Binary entropy in bits, `0·log 0 := 0`.
pub fn cell_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 || q >= 1.0 { 0.0 } else { -q * q.log2() };
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    term(p) + term(1.0 - p)
}

fn sigmoid(l: f64) -> f64 {
    1.0 / (1.0 + (-l).exp())
}

/// Mutual information between a cell with target probability `p` and one reading.
pub fn binary_channel_information(p: f64, sensor: &SensorModel) -> f64 {
    let h_z = cell_entropy(sensor.detection_probability(p));
    let h_z_given_m = p * cell_entropy(sensor.p_hit) + (1.0 - p) * cell_entropy(sensor.p_false);
    (h_z - h_z_given_m).max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefMap {
    log_odds: Grid<f64>,
    /// Obstacle cells, excluded from every entropy sum.
    blocked: Grid<bool>,
    clamp: f64,
}

/// Uniform prior `P = 0.5` over the map with the default clamp.
pub fn init_uniform(map: &WorldMap) -> BeliefMap {
    BeliefMap::uniform(map, DEFAULT_LOG_ODDS_CLAMP)
}

impl BeliefMap {
    pub fn uniform(map: &WorldMap, clamp: f64) -> Self {
        assert!(clamp > 0.0, "log-odds clamp must be positive");
        Self {
            log_odds: Grid::filled(map.rows(), map.cols(), 0.0),
            blocked: map.blocked_grid().clone(),
            clamp,
        }
    }

    pub fn rows(&self) -> usize {
        self.log_odds.rows()
    }

    pub fn cols(&self) -> usize {
        self.log_odds.cols()
    }

    pub fn clamp(&self) -> f64 {
        self.clamp
    }

    pub fn log_odds(&self, cell: CellIndex) -> f64 {
        self.log_odds[cell]
    }

    pub fn log_odds_grid(&self) -> &Grid<f64> {
        &self.log_odds
    }

    pub fn set_log_odds(&mut self, cell: CellIndex, l: f64) {
        self.log_odds[cell] = l.clamp(-self.clamp, self.clamp);
    }

    pub fn is_blocked(&self, cell: CellIndex) -> bool {
        self.blocked[cell]
    }

    /// `P(M_i = 1 | z_0:t)`, always inside `(0, 1)`.
    pub fn probability(&self, cell: CellIndex) -> f64 {
        sigmoid(self.log_odds[cell])
    }

    pub fn probability_grid(&self) -> Grid<f64> {
        self.log_odds.map(|&l| sigmoid(l))
    }

    pub fn is_resolved(&self, cell: CellIndex) -> bool {
        self.log_odds[cell].abs() >= self.clamp
    }

    /// Probability used for information measures: saturated cells count as certain.
    fn information_probability(&self, cell: CellIndex) -> f64 {
        let l = self.log_odds[cell];
        if l >= self.clamp {
            1.0
        } else if l <= -self.clamp {
            0.0
        } else {
            sigmoid(l)
        }
    }

    /// Entropy of one cell in bits; zero for obstacle and resolved cells.
    pub fn cell_entropy(&self, cell: CellIndex) -> f64 {
        if self.blocked[cell] {
            0.0
        } else {
            cell_entropy(self.information_probability(cell))
        }
    }

    pub fn entropy_map(&self) -> Grid<f64> {
        let data = (0..self.log_odds.len())
            .map(|i| {
                let cell = CellIndex::new(i / self.cols(), i % self.cols());
                self.cell_entropy(cell)
            })
            .collect();
        Grid::from_vec(self.rows(), self.cols(), data)
    }

    /// Total entropy over all non-obstacle cells.
    pub fn total_entropy(&self) -> f64 {
        (0..self.rows())
            .flat_map(|r| (0..self.cols()).map(move |c| CellIndex::new(r, c)))
            .map(|c| self.cell_entropy(c))
            .sum()
    }

    pub fn entropy_over(&self, cells: &[CellIndex]) -> f64 {
        cells.iter().map(|&c| self.cell_entropy(c)).sum()
    }

    /// Log-odds update `l ← clamp(l + l_meas(z))` for each reading.
    pub fn update(&mut self, obs: &Observation, sensor: &SensorModel) {
        for &(cell, z) in &obs.readings {
            let l = self.log_odds[cell] + sensor.log_odds_increment(z);
            self.log_odds[cell] = l.clamp(-self.clamp, self.clamp);
        }
    }

    pub fn updated(&self, obs: &Observation, sensor: &SensorModel) -> Self {
        let mut next = self.clone();
        next.update(obs, sensor);
        next
    }

    /// Updates each cell with its most likely reading.
    ///
    /// Used by look-ahead planners to account for the information an imagined
    /// visit would consume without sampling the ground truth.
    pub fn assume_likely_observation(&mut self, visible: &[CellIndex], sensor: &SensorModel) {
        for &cell in visible {
            let z = sensor.detection_probability(self.information_probability(cell)) >= 0.5;
            let l = self.log_odds[cell] + sensor.log_odds_increment(z);
            self.log_odds[cell] = l.clamp(-self.clamp, self.clamp);
        }
    }

    /// Sum over `visible` of the per-cell binary-channel mutual information.
    pub fn expected_mutual_information(&self, visible: &[CellIndex], sensor: &SensorModel) -> f64 {
        visible
            .iter()
            .filter(|&&c| !self.blocked[c])
            .map(|&c| binary_channel_information(self.information_probability(c), sensor))
            .sum()
    }

    fn check_shape(&self, other: &Self) -> Result<(), BeliefError> {
        if self.log_odds.same_shape(&other.log_odds) {
            Ok(())
        } else {
            Err(BeliefError::ShapeMismatch(self.rows(), self.cols(), other.rows(), other.cols()))
        }
    }
}

/// Realized entropy reduction over `free` between two beliefs.
pub fn realized_info_gain(before: &BeliefMap, after: &BeliefMap, free: &[CellIndex]) -> Result<f64, BeliefError> {
    before.check_shape(after)?;
    Ok(free
        .iter()
        .map(|&c| before.cell_entropy(c) - after.cell_entropy(c))
        .sum())
}

/// `H(M_free | z_0:t) ≤ (1 − β)·|free|`, the initial uniform entropy being one bit per cell.
///
/// The bound carries a relative slack of 1e-12 so that an exact fraction such
/// as 90 % is not lost to the rounding of `1 − β`.
pub fn coverage_reached(belief: &BeliefMap, free: &[CellIndex], beta: f64) -> bool {
    let bound = (1.0 - beta) * free.len() as f64;
    belief.entropy_over(free) <= bound + 1e-12 * free.len() as f64
}
