//! Second-order unicycle: state `[x, y, ψ, v, ω]`, input `[u_a, u_α]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::world::WorldPoint;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub v: f64,
    pub omega: f64,
}

impl RobotState {
    pub fn at_rest(position: WorldPoint, psi: f64) -> Self {
        Self {
            x: position.x,
            y: position.y,
            psi: wrap_angle(psi),
            v: 0.0,
            omega: 0.0,
        }
    }

    pub fn position(&self) -> WorldPoint {
        WorldPoint::new(self.x, self.y)
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.x, self.y, self.psi, self.v, self.omega]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self {
            x: a[0],
            y: a[1],
            psi: a[2],
            v: a[3],
            omega: a[4],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    /// Linear acceleration, m/s².
    pub u_a: f64,
    /// Angular acceleration, rad/s².
    pub u_alpha: f64,
}

impl ControlInput {
    pub const ZERO: Self = Self { u_a: 0.0, u_alpha: 0.0 };

    pub const fn new(u_a: f64, u_alpha: f64) -> Self {
        Self { u_a, u_alpha }
    }
}

/// Admissible state and input bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Limits {
    pub v_min: f64,
    pub v_max: f64,
    pub omega_max: f64,
    pub a_max: f64,
    pub alpha_max: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            v_min: 0.0,
            v_max: 3.0,
            omega_max: PI / 2.0,
            a_max: 2.0,
            alpha_max: PI,
        }
    }
}

impl Limits {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.v_min.is_finite() && self.v_max.is_finite()) {
            return Err("velocity bounds must be finite".into());
        }
        if !(self.v_min < self.v_max && self.v_max > 0.0) {
            return Err("need v_min < v_max and v_max > 0".into());
        }
        if !(self.omega_max > 0.0 && self.a_max > 0.0 && self.alpha_max > 0.0) {
            return Err("omega_max, a_max and alpha_max must be positive".into());
        }
        Ok(())
    }

    pub fn state_within(&self, s: &RobotState) -> bool {
        s.v >= self.v_min && s.v <= self.v_max && s.omega.abs() <= self.omega_max
    }

    pub fn input_within(&self, u: &ControlInput) -> bool {
        u.u_a.abs() <= self.a_max && u.u_alpha.abs() <= self.alpha_max
    }
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

pub fn derivative(s: &RobotState, u: &ControlInput) -> [f64; 5] {
    let (sin, cos) = s.psi.sin_cos();
    [s.v * cos, s.v * sin, s.omega, u.u_a, u.u_alpha]
}

fn offset(s: &RobotState, k: &[f64; 5], h: f64) -> RobotState {
    RobotState {
        x: s.x + h * k[0],
        y: s.y + h * k[1],
        psi: s.psi + h * k[2],
        v: s.v + h * k[3],
        omega: s.omega + h * k[4],
    }
}

/// One RK4 step without projection onto the limits.
pub fn rk4_raw(s: &RobotState, u: &ControlInput, dt: f64) -> RobotState {
    let k1 = derivative(s, u);
    let k2 = derivative(&offset(s, &k1, dt / 2.0), u);
    let k3 = derivative(&offset(s, &k2, dt / 2.0), u);
    let k4 = derivative(&offset(s, &k3, dt), u);
    let mut incr = [0.0; 5];
    for i in 0..5 {
        incr[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    }
    offset(s, &incr, dt)
}

/// RK4 step followed by clamping `v`, `ω` to the limits and wrapping `ψ`.
pub fn step(s: &RobotState, u: &ControlInput, dt: f64, limits: &Limits) -> RobotState {
    debug_assert!(dt > 0.0);
    let mut next = rk4_raw(s, u, dt);
    next.v = next.v.clamp(limits.v_min, limits.v_max);
    next.omega = next.omega.clamp(-limits.omega_max, limits.omega_max);
    next.psi = wrap_angle(next.psi);
    next
}

/// Component-wise saturation of the input.
pub fn clamp_input(u: &ControlInput, limits: &Limits) -> ControlInput {
    ControlInput {
        u_a: u.u_a.clamp(-limits.a_max, limits.a_max),
        u_alpha: u.u_alpha.clamp(-limits.alpha_max, limits.alpha_max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn derivative_examples() {
        let s = RobotState { v: 1.0, ..Default::default() };
        assert_eq!(derivative(&s, &ControlInput::ZERO), [1.0, 0.0, 0.0, 0.0, 0.0]);
        let still = RobotState { psi: 1.234, ..Default::default() };
        let d = derivative(&still, &ControlInput::new(0.3, 0.1));
        assert_eq!((d[0], d[1]), (0.0, 0.0));
        let up = RobotState { v: 2.0, psi: PI / 2.0, ..Default::default() };
        let d = derivative(&up, &ControlInput::ZERO);
        assert!(d[0].abs() < 1e-12 && (d[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant_velocity_step_is_exact() {
        let s = RobotState { v: 1.0, ..Default::default() };
        let n = step(&s, &ControlInput::ZERO, 0.1, &Limits::default());
        assert_eq!(n.x, 0.1);
        assert_eq!(n.y, 0.0);
    }

    #[test]
    fn pure_rotation() {
        let limits = Limits { omega_max: PI, ..Limits::default() };
        let s = RobotState { omega: PI, psi: 0.0, ..Default::default() };
        let n = step(&s, &ControlInput::ZERO, 1.0, &limits);
        assert!((n.psi - PI).abs() < 1e-12);
        assert_eq!((n.x, n.y), (0.0, 0.0));
        let s = RobotState { omega: PI, psi: 0.5, ..Default::default() };
        let n = step(&s, &ControlInput::ZERO, 1.0, &limits);
        assert!((n.psi - wrap_angle(0.5 + PI)).abs() < 1e-12);
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn clamp_input_examples() {
        let l = Limits::default();
        let u = ControlInput::new(0.5, -1.0);
        assert_eq!(clamp_input(&u, &l), u);
        assert_eq!(clamp_input(&ControlInput::new(10.0 * l.a_max, 0.0), &l).u_a, l.a_max);
        let big = ControlInput::new(-7.0, 9.0);
        assert_eq!(clamp_input(&clamp_input(&big, &l), &l), clamp_input(&big, &l));
    }

    /// Forward Euler over `substeps` per `dt`, with the same end-of-step projection as `step`.
    fn fine_euler(s0: &RobotState, inputs: &[ControlInput], dt: f64, substeps: usize, limits: &Limits) -> RobotState {
        let h = dt / substeps as f64;
        let mut s = *s0;
        for u in inputs {
            for _ in 0..substeps {
                let d = derivative(&s, u);
                s = offset(&s, &d, h);
            }
            s.v = s.v.clamp(limits.v_min, limits.v_max);
            s.omega = s.omega.clamp(-limits.omega_max, limits.omega_max);
        }
        s
    }

    #[test]
    fn rk4_agrees_with_fine_euler() {
        let limits = Limits::default();
        let mut rng = crate::seeded_rng(3);
        for _ in 0..10 {
            let s0 = RobotState {
                x: 0.0,
                y: 0.0,
                psi: rng.gen_range(-PI..PI),
                v: rng.gen_range(0.5..2.5),
                omega: rng.gen_range(-1.0..1.0),
            };
            let inputs: Vec<_> = (0..10)
                .map(|_| ControlInput::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
                .collect();
            let mut s = s0;
            for u in &inputs {
                s = step(&s, u, 0.1, &limits);
            }
            let e = fine_euler(&s0, &inputs, 0.1, 1_000_000, &limits);
            let err = ((s.x - e.x).powi(2) + (s.y - e.y).powi(2)).sqrt();
            assert!(err <= 1e-6, "position difference {err}");
        }
    }

    proptest! {
        #[test]
        fn speed_matches_velocity(psi in -10.0f64..10.0, v in -5.0f64..5.0) {
            let s = RobotState { psi, v, ..Default::default() };
            let d = derivative(&s, &ControlInput::ZERO);
            prop_assert!((d[0].hypot(d[1]) - v.abs()).abs() <= 1e-12 * (1.0 + v.abs()));
        }

        #[test]
        fn clamped_step_respects_limits(v in 0.0f64..3.0, omega in -1.5f64..1.5, ua in -50.0f64..50.0, ualpha in -50.0f64..50.0) {
            let limits = Limits::default();
            let s = RobotState { v, omega, ..Default::default() };
            let n = step(&s, &ControlInput::new(ua, ualpha), 0.1, &limits);
            prop_assert!(limits.state_within(&n));
            prop_assert!(n.psi > -PI && n.psi <= PI);
        }
    }
}
