//! Receding-horizon viewpoint tracking.
//!
//! Single-shooting transcription over the `N` input vectors. States come from
//! rolling out the clamped RK4 model, so the predicted trajectory is
//! dynamically consistent by construction. Obstacle half-planes are handled
//! with a PHR augmented Lagrangian whose subproblems are minimized by a
//! nonmonotone spectral projected gradient method on the input box.
//! Gradients are exact: forward sensitivities of each RK4 step followed by an
//! adjoint sweep.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{self, ControlInput, Limits, RobotState};
use crate::world::{LinearConstraint, WorldMap, WorldPoint};

type Mat5 = SMatrix<f64, 5, 5>;
type Mat5x7 = SMatrix<f64, 5, 7>;
type Mat5x2 = SMatrix<f64, 5, 2>;
type Vec5 = SVector<f64, 5>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpcError {
    #[error("constraint {index} has a non-unit normal (norm {norm})")]
    InvalidConstraint { index: usize, norm: f64 },
    #[error("invalid MPC configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_outer_iterations: usize,
    pub max_inner_iterations: usize,
    pub initial_penalty: f64,
    pub penalty_growth: f64,
    pub max_penalty: f64,
    /// Maximum admissible constraint violation, meters.
    pub constraint_tolerance: f64,
    /// Infinity norm of the projected gradient at which a subproblem is solved.
    pub gradient_tolerance: f64,
    /// Weight on the violation in the merit used to rank iterates.
    pub merit_penalty: f64,
    /// Record one trace entry per outer iteration.
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_outer_iterations: 12,
            max_inner_iterations: 60,
            initial_penalty: 50.0,
            penalty_growth: 10.0,
            max_penalty: 1e7,
            constraint_tolerance: 1e-3,
            gradient_tolerance: 1e-5,
            merit_penalty: 1e4,
            trace: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MpcConfig {
    pub horizon: usize,
    pub dt: f64,
    pub q_terminal: f64,
    pub q_a: f64,
    pub q_alpha: f64,
    /// Number of nearest obstacles turned into constraints.
    pub n_obs: usize,
    pub robot_radius: f64,
    /// Extra inflation added to the radius inside the optimizer.
    pub safety_margin: f64,
    /// Floor on the squared distance normalizing the terminal cost, m².
    pub terminal_denominator_min: f64,
    pub limits: Limits,
    pub solver: SolverConfig,
}

impl Default for MpcConfig {
    fn default() -> Self {
        Self {
            horizon: 15,
            dt: 0.1,
            q_terminal: 5.0,
            q_a: 0.003,
            q_alpha: 0.003,
            n_obs: 4,
            robot_radius: 0.5,
            safety_margin: 0.05,
            terminal_denominator_min: 1e-4,
            limits: Limits::default(),
            solver: SolverConfig::default(),
        }
    }
}

impl MpcConfig {
    pub fn validate(&self) -> Result<(), MpcError> {
        let bad = |m: &str| Err(MpcError::InvalidConfig(m.to_string()));
        if self.horizon == 0 {
            return bad("horizon must be at least 1");
        }
        if !(self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if self.q_terminal < 0.0 || self.q_a < 0.0 || self.q_alpha < 0.0 {
            return bad("weights must be non-negative");
        }
        if self.robot_radius < 0.0 || self.safety_margin < 0.0 {
            return bad("robot_radius and safety_margin must be non-negative");
        }
        if !(self.terminal_denominator_min > 0.0) {
            return bad("terminal_denominator_min must be positive");
        }
        let s = &self.solver;
        if !(s.constraint_tolerance > 0.0 && s.gradient_tolerance > 0.0) {
            return bad("solver tolerances must be positive");
        }
        if s.max_outer_iterations == 0 || s.max_inner_iterations == 0 {
            return bad("solver iteration limits must be at least 1");
        }
        if !(s.initial_penalty > 0.0 && s.penalty_growth >= 1.0) {
            return bad("penalty must be positive with growth factor >= 1");
        }
        self.limits.validate().map_err(MpcError::InvalidConfig)
    }

    /// Radius used in the optimizer's half-planes.
    pub fn effective_radius(&self) -> f64 {
        self.robot_radius + self.safety_margin
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub outer: usize,
    pub inner_iterations: usize,
    pub cost: f64,
    pub violation: f64,
    pub merit: f64,
    pub penalty: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpcSolution {
    pub inputs: Vec<ControlInput>,
    pub states: Vec<RobotState>,
    pub cost: f64,
    pub max_constraint_violation: f64,
    pub status: SolveStatus,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    /// Merit of the sequence the solver started from.
    pub initial_merit: f64,
    pub merit: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRecord>>,
}

impl MpcSolution {
    pub fn terminal_position(&self) -> WorldPoint {
        self.states.last().expect("non-empty trajectory").position()
    }
}

/// Writes trace records as JSON lines.
pub fn write_trace_jsonl<W: Write>(trace: &[TraceRecord], mut out: W) -> std::io::Result<()> {
    for rec in trace {
        serde_json::to_writer(&mut out, rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Half-planes for one solve: the `n_obs` nearest obstacles plus the map edges.
pub fn collect_constraints(world: &WorldMap, position: WorldPoint, config: &MpcConfig) -> Vec<LinearConstraint> {
    let mut constraints = world.closest_obstacle_constraints(position, config.n_obs);
    constraints.extend(world.boundary_constraints());
    constraints
}

pub fn stage_cost(u: &ControlInput, config: &MpcConfig) -> f64 {
    config.q_a * u.u_a * u.u_a + config.q_alpha * u.u_alpha * u.u_alpha
}

/// Terminal distance to the reference, normalized by the current distance.
pub fn terminal_cost(p_terminal: WorldPoint, p_ref: WorldPoint, p_now: WorldPoint, q_terminal: f64, den_min: f64) -> f64 {
    let den = (p_now - p_ref).norm_squared().max(den_min);
    q_terminal * (p_terminal - p_ref).norm_squared() / den
}

/// Forward simulation of `inputs` from `x0`; returns `len + 1` states.
pub fn rollout(x0: &RobotState, inputs: &[ControlInput], dt: f64, limits: &Limits) -> Vec<RobotState> {
    let mut states = Vec::with_capacity(inputs.len() + 1);
    states.push(*x0);
    let mut s = *x0;
    for u in inputs {
        s = dynamics::step(&s, u, dt, limits);
        states.push(s);
    }
    states
}

/// Exact objective value and the largest constraint violation over stages `1..=N`.
pub fn evaluate_objective_and_violation(
    inputs: &[ControlInput],
    x0: &RobotState,
    p_ref: WorldPoint,
    constraints: &[LinearConstraint],
    config: &MpcConfig,
) -> (f64, f64) {
    let problem = ShootingProblem::new(*x0, p_ref, constraints, config);
    let z = flatten(inputs);
    let states = problem.rollout(&z);
    (problem.cost_from_states(&z, &states), problem.violation_from_states(&states))
}

fn flatten(inputs: &[ControlInput]) -> Vec<f64> {
    inputs.iter().flat_map(|u| [u.u_a, u.u_alpha]).collect()
}

fn unflatten(z: &[f64]) -> Vec<ControlInput> {
    z.chunks_exact(2).map(|c| ControlInput::new(c[0], c[1])).collect()
}

fn input(z: &[f64], k: usize) -> ControlInput {
    ControlInput::new(z[2 * k], z[2 * k + 1])
}

/// ∂f/∂s of the unicycle vector field.
fn state_jacobian(s: &RobotState) -> Mat5 {
    let (sin, cos) = s.psi.sin_cos();
    let mut m = Mat5::zeros();
    m[(0, 2)] = -s.v * sin;
    m[(0, 3)] = cos;
    m[(1, 2)] = s.v * cos;
    m[(1, 3)] = sin;
    m[(2, 4)] = 1.0;
    m
}

fn shifted(s: &RobotState, k: &[f64; 5], h: f64) -> RobotState {
    RobotState {
        x: s.x + h * k[0],
        y: s.y + h * k[1],
        psi: s.psi + h * k[2],
        v: s.v + h * k[3],
        omega: s.omega + h * k[4],
    }
}

/// Sensitivities `(∂s'/∂s, ∂s'/∂u)` of one clamped RK4 step.
fn step_sensitivity(s: &RobotState, u: &ControlInput, dt: f64, limits: &Limits) -> (Mat5, Mat5x2) {
    let mut e = Mat5x7::zeros();
    for i in 0..5 {
        e[(i, i)] = 1.0;
    }
    let mut g = Mat5x7::zeros();
    g[(3, 5)] = 1.0;
    g[(4, 6)] = 1.0;

    let k1 = dynamics::derivative(s, u);
    let s2 = shifted(s, &k1, dt / 2.0);
    let k2 = dynamics::derivative(&s2, u);
    let s3 = shifted(s, &k2, dt / 2.0);
    let k3 = dynamics::derivative(&s3, u);
    let s4 = shifted(s, &k3, dt);

    let dk1 = state_jacobian(s) * e + g;
    let dk2 = state_jacobian(&s2) * (e + dk1 * (dt / 2.0)) + g;
    let dk3 = state_jacobian(&s3) * (e + dk2 * (dt / 2.0)) + g;
    let dk4 = state_jacobian(&s4) * (e + dk3 * dt) + g;
    let mut d = e + (dk1 + dk2 * 2.0 + dk3 * 2.0 + dk4) * (dt / 6.0);

    let raw = dynamics::rk4_raw(s, u, dt);
    if raw.v < limits.v_min || raw.v > limits.v_max {
        d.row_mut(3).fill(0.0);
    }
    if raw.omega < -limits.omega_max || raw.omega > limits.omega_max {
        d.row_mut(4).fill(0.0);
    }
    (d.fixed_view::<5, 5>(0, 0).into_owned(), d.fixed_view::<5, 2>(0, 5).into_owned())
}

/// The transcribed problem for one solve.
pub struct ShootingProblem<'a> {
    x0: RobotState,
    p_ref: WorldPoint,
    constraints: &'a [LinearConstraint],
    config: &'a MpcConfig,
    denominator: f64,
    radius: f64,
}

impl<'a> ShootingProblem<'a> {
    pub fn new(x0: RobotState, p_ref: WorldPoint, constraints: &'a [LinearConstraint], config: &'a MpcConfig) -> Self {
        let denominator = (x0.position() - p_ref)
            .norm_squared()
            .max(config.terminal_denominator_min);
        Self {
            x0,
            p_ref,
            constraints,
            config,
            denominator,
            radius: config.effective_radius(),
        }
    }

    pub fn n_vars(&self) -> usize {
        2 * self.config.horizon
    }

    pub fn rollout(&self, z: &[f64]) -> Vec<RobotState> {
        let mut states = Vec::with_capacity(self.config.horizon + 1);
        let mut s = self.x0;
        states.push(s);
        for k in 0..self.config.horizon {
            s = dynamics::step(&s, &input(z, k), self.config.dt, &self.config.limits);
            states.push(s);
        }
        states
    }

    fn cost_from_states(&self, z: &[f64], states: &[RobotState]) -> f64 {
        let stage: f64 = (0..self.config.horizon)
            .map(|k| stage_cost(&input(z, k), self.config))
            .sum();
        let terminal = states.last().unwrap().position() - self.p_ref;
        stage + self.config.q_terminal * terminal.norm_squared() / self.denominator
    }

    /// `g = nᵀp − (b − r)` for stage `k ≥ 1` and constraint `j`.
    fn constraint_value(&self, state: &RobotState, c: &LinearConstraint) -> f64 {
        c.value(state.position()) - (c.offset - self.radius)
    }

    fn violation_from_states(&self, states: &[RobotState]) -> f64 {
        states[1..]
            .iter()
            .flat_map(|s| self.constraints.iter().map(move |c| self.constraint_value(s, c)))
            .fold(0.0, f64::max)
    }

    pub fn cost(&self, z: &[f64]) -> f64 {
        self.cost_from_states(z, &self.rollout(z))
    }

    /// Objective plus PHR terms `(1/2ρ)Σ[max(0, λ+ρg)² − λ²]`.
    fn augmented_from_states(&self, z: &[f64], states: &[RobotState], multipliers: &[f64], rho: f64) -> f64 {
        let mut value = self.cost_from_states(z, states);
        let m = self.constraints.len();
        for (k, s) in states[1..].iter().enumerate() {
            for (j, c) in self.constraints.iter().enumerate() {
                let lambda = multipliers[k * m + j];
                let shifted = (lambda + rho * self.constraint_value(s, c)).max(0.0);
                value += (shifted * shifted - lambda * lambda) / (2.0 * rho);
            }
        }
        value
    }

    /// Value and exact gradient of the augmented Lagrangian.
    ///
    /// With no constraints (or `rho` irrelevant) this is the plain objective.
    fn augmented_with_gradient(&self, z: &[f64], multipliers: &[f64], rho: f64) -> (f64, Vec<f64>) {
        let n = self.config.horizon;
        let cfg = self.config;
        let m = self.constraints.len();
        let mut states = Vec::with_capacity(n + 1);
        let mut sens = Vec::with_capacity(n);
        let mut s = self.x0;
        states.push(s);
        for k in 0..n {
            let u = input(z, k);
            sens.push(step_sensitivity(&s, &u, cfg.dt, &cfg.limits));
            s = dynamics::step(&s, &u, cfg.dt, &cfg.limits);
            states.push(s);
        }
        let value = self.augmented_from_states(z, &states, multipliers, rho);

        // Position gradient of the state-dependent terms at stage k.
        let position_grad = |k: usize| -> (f64, f64) {
            let st = &states[k];
            let mut gx = 0.0;
            let mut gy = 0.0;
            for (j, c) in self.constraints.iter().enumerate() {
                let w = (multipliers[(k - 1) * m + j] + rho * self.constraint_value(st, c)).max(0.0);
                gx += w * c.normal.x;
                gy += w * c.normal.y;
            }
            if k == n {
                let scale = 2.0 * cfg.q_terminal / self.denominator;
                gx += scale * (st.x - self.p_ref.x);
                gy += scale * (st.y - self.p_ref.y);
            }
            (gx, gy)
        };

        let mut grad = vec![0.0; 2 * n];
        let (gx, gy) = position_grad(n);
        let mut adjoint = Vec5::new(gx, gy, 0.0, 0.0, 0.0);
        for k in (0..n).rev() {
            let (a, b) = &sens[k];
            let gu = b.transpose() * adjoint;
            grad[2 * k] = gu[0] + 2.0 * cfg.q_a * z[2 * k];
            grad[2 * k + 1] = gu[1] + 2.0 * cfg.q_alpha * z[2 * k + 1];
            adjoint = a.transpose() * adjoint;
            if k >= 1 {
                let (gx, gy) = position_grad(k);
                adjoint[0] += gx;
                adjoint[1] += gy;
            }
        }
        (value, grad)
    }

    /// Exact objective gradient (no constraint terms).
    pub fn cost_gradient(&self, z: &[f64]) -> Vec<f64> {
        let unconstrained = ShootingProblem {
            constraints: &[],
            ..*self
        };
        unconstrained.augmented_with_gradient(z, &[], 1.0).1
    }
}

/// Stateless solver bound to a configuration.
#[derive(Clone, Debug, Default)]
pub struct MpcSolver {
    pub config: MpcConfig,
}

struct Iterate {
    z: Vec<f64>,
    cost: f64,
    violation: f64,
    merit: f64,
}

impl MpcSolver {
    pub fn new(config: MpcConfig) -> Result<Self, MpcError> {
        config.validate()?;
        Ok(Self { config })
    }

    fn project(&self, z: &mut [f64]) {
        let l = &self.config.limits;
        for pair in z.chunks_exact_mut(2) {
            pair[0] = pair[0].clamp(-l.a_max, l.a_max);
            pair[1] = pair[1].clamp(-l.alpha_max, l.alpha_max);
        }
    }

    fn iterate(&self, problem: &ShootingProblem, z: Vec<f64>) -> Iterate {
        let states = problem.rollout(&z);
        let cost = problem.cost_from_states(&z, &states);
        let violation = problem.violation_from_states(&states);
        Iterate {
            merit: cost + self.config.solver.merit_penalty * violation,
            z,
            cost,
            violation,
        }
    }

    /// Shifts a previous input sequence by one stage, padding with zero input.
    pub fn shift_warm_start(&self, previous: &[ControlInput]) -> Vec<ControlInput> {
        let n = self.config.horizon;
        previous
            .iter()
            .skip(1)
            .copied()
            .chain(std::iter::repeat(ControlInput::ZERO))
            .take(n)
            .collect()
    }

    /// Input sequence that turns toward `p_ref` and drives once roughly aligned.
    ///
    /// Used as an extra starting point: from rest with the reference behind the
    /// robot, the zero sequence is a stationary point of the shooting problem.
    pub fn pursuit_guess(&self, x0: &RobotState, p_ref: WorldPoint) -> Vec<ControlInput> {
        let cfg = &self.config;
        let l = &cfg.limits;
        let mut s = *x0;
        let mut inputs = Vec::with_capacity(cfg.horizon);
        for _ in 0..cfg.horizon {
            let (dx, dy) = (p_ref.x - s.x, p_ref.y - s.y);
            let err = dynamics::wrap_angle(dy.atan2(dx) - s.psi);
            let omega_des = (2.0 * err).clamp(-l.omega_max, l.omega_max);
            let v_des = if err.abs() < FRAC_PI_2 { dx.hypot(dy).min(l.v_max) * err.cos() } else { 0.0 };
            let u = dynamics::clamp_input(&ControlInput::new((v_des - s.v) / cfg.dt, (omega_des - s.omega) / cfg.dt), l);
            s = dynamics::step(&s, &u, cfg.dt, l);
            inputs.push(u);
        }
        inputs
    }

    pub fn solve(
        &self,
        x0: &RobotState,
        p_ref: WorldPoint,
        constraints: &[LinearConstraint],
        warm_start: Option<&[ControlInput]>,
    ) -> Result<MpcSolution, MpcError> {
        for (index, c) in constraints.iter().enumerate() {
            if !c.has_unit_normal() {
                return Err(MpcError::InvalidConstraint {
                    index,
                    norm: c.normal.norm(),
                });
            }
        }
        let cfg = &self.config;
        let sc = &cfg.solver;
        let problem = ShootingProblem::new(*x0, p_ref, constraints, cfg);
        let n_vars = problem.n_vars();

        // Start from the better of the zero sequence and the shifted warm start.
        let mut start = self.iterate(&problem, vec![0.0; n_vars]);
        if let Some(prev) = warm_start {
            let mut z = flatten(&self.shift_warm_start(prev));
            self.project(&mut z);
            let candidate = self.iterate(&problem, z);
            if candidate.merit < start.merit {
                start = candidate;
            }
        }
        let pursuit = self.iterate(&problem, flatten(&self.pursuit_guess(x0, p_ref)));
        if pursuit.merit < start.merit {
            start = pursuit;
        }
        let initial_merit = start.merit;

        let m = constraints.len();
        let mut multipliers = vec![0.0; cfg.horizon * m];
        let mut rho = sc.initial_penalty;
        let mut z = start.z.clone();
        let mut best = start;
        let mut converged = false;
        let mut trace = sc.trace.then(Vec::new);
        let mut inner_total = 0;
        let mut outer_done = 0;
        let mut prev_violation = f64::INFINITY;

        for outer in 0..sc.max_outer_iterations {
            outer_done = outer + 1;
            let (z_new, inner_iters, inner_converged) = self.spg(&problem, z, &multipliers, rho);
            inner_total += inner_iters;
            z = z_new;
            let it = self.iterate(&problem, z.clone());
            let accepted = it.merit < best.merit || (it.merit == best.merit && it.violation <= best.violation);
            if let Some(t) = trace.as_mut() {
                t.push(TraceRecord {
                    outer,
                    inner_iterations: inner_iters,
                    cost: it.cost,
                    violation: it.violation,
                    merit: it.merit,
                    penalty: rho,
                    accepted,
                });
            }
            let feasible = it.violation <= sc.constraint_tolerance;
            if accepted {
                best = it;
            }
            if feasible && inner_converged {
                converged = accepted || best.violation <= sc.constraint_tolerance;
                break;
            }
            if m > 0 {
                let states = problem.rollout(&z);
                for (k, s) in states[1..].iter().enumerate() {
                    for (j, c) in constraints.iter().enumerate() {
                        let idx = k * m + j;
                        multipliers[idx] = (multipliers[idx] + rho * problem.constraint_value(s, c)).max(0.0);
                    }
                }
                let violation = problem.violation_from_states(&states);
                if violation > 0.25 * prev_violation || violation > sc.constraint_tolerance {
                    rho = (rho * sc.penalty_growth).min(sc.max_penalty);
                }
                prev_violation = violation;
            }
        }

        let status = if best.violation > sc.constraint_tolerance {
            SolveStatus::Infeasible
        } else if converged {
            SolveStatus::Converged
        } else {
            SolveStatus::MaxIterations
        };
        let inputs = unflatten(&best.z);
        let states = rollout(x0, &inputs, cfg.dt, &cfg.limits);
        Ok(MpcSolution {
            inputs,
            states,
            cost: best.cost,
            max_constraint_violation: best.violation,
            status,
            outer_iterations: outer_done,
            inner_iterations: inner_total,
            initial_merit,
            merit: best.merit,
            trace,
        })
    }

    /// Nonmonotone spectral projected gradient on the augmented Lagrangian.
    ///
    /// Returns the final point, the iteration count and whether the projected
    /// gradient dropped below tolerance.
    fn spg(&self, problem: &ShootingProblem, mut z: Vec<f64>, multipliers: &[f64], rho: f64) -> (Vec<f64>, usize, bool) {
        const MEMORY: usize = 8;
        const SUFFICIENT_DECREASE: f64 = 1e-4;
        const STEP_MIN: f64 = 1e-10;
        const STEP_MAX: f64 = 1e10;
        let sc = &self.config.solver;
        let n = z.len();
        self.project(&mut z);
        let (mut f, mut g) = problem.augmented_with_gradient(&z, multipliers, rho);
        let mut history = vec![f];
        let mut trial = vec![0.0; n];
        let mut direction = vec![0.0; n];

        let proj_grad_norm = |z: &[f64], g: &[f64]| -> f64 {
            let mut p: Vec<f64> = z.iter().zip(g).map(|(zi, gi)| zi - gi).collect();
            self.project(&mut p);
            p.iter().zip(z).map(|(pi, zi)| (pi - zi).abs()).fold(0.0, f64::max)
        };

        let pg0 = proj_grad_norm(&z, &g);
        if pg0 <= sc.gradient_tolerance {
            return (z, 0, true);
        }
        let mut step = (1.0 / pg0).clamp(STEP_MIN, STEP_MAX);

        for iter in 0..sc.max_inner_iterations {
            for i in 0..n {
                trial[i] = z[i] - step * g[i];
            }
            self.project(&mut trial);
            let mut slope = 0.0;
            for i in 0..n {
                direction[i] = trial[i] - z[i];
                slope += direction[i] * g[i];
            }
            let f_ref = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut t = 1.0;
            let (z_new, f_new) = loop {
                let candidate: Vec<f64> = z.iter().zip(&direction).map(|(zi, di)| zi + t * di).collect();
                let states = problem.rollout(&candidate);
                let value = problem.augmented_from_states(&candidate, &states, multipliers, rho);
                if value <= f_ref + SUFFICIENT_DECREASE * t * slope || t < 1e-12 {
                    break (candidate, value);
                }
                // Safeguarded quadratic backtracking.
                let denom = 2.0 * (value - f - t * slope);
                let t_quad = if denom > 0.0 { -slope * t * t / denom } else { t / 2.0 };
                t = t_quad.clamp(0.1 * t, 0.5 * t);
            };
            if f_new > f_ref {
                // Line search failed to make progress.
                return (z, iter + 1, false);
            }
            let (f_next, g_next) = problem.augmented_with_gradient(&z_new, multipliers, rho);
            let mut ss = 0.0;
            let mut sy = 0.0;
            for i in 0..n {
                let s_i = z_new[i] - z[i];
                let y_i = g_next[i] - g[i];
                ss += s_i * s_i;
                sy += s_i * y_i;
            }
            step = if sy > 0.0 { (ss / sy).clamp(STEP_MIN, STEP_MAX) } else { STEP_MAX.min(1e3) };
            z = z_new;
            f = f_next;
            g = g_next;
            history.push(f_new);
            if history.len() > MEMORY {
                history.remove(0);
            }
            if proj_grad_norm(&z, &g) <= sc.gradient_tolerance {
                return (z, iter + 1, true);
            }
        }
        (z, sc.max_inner_iterations, false)
    }
}
