//! Unicycle waypoint-selection world: each tick the controller picks a
//! waypoint near the robot, a proportional controller drives toward it, and
//! the pick is scored by grid shortest-path distance to the nearest goal,
//! with a flat penalty whenever the 5-step prediction violates the barrier.

mod env;
mod waypoint;

pub use env::{
    cell_center, cell_of, sample_environment, sample_environment_with, shortest_goal_distance, Cell, Environment, EnvironmentFile,
    GRID_COLS, GRID_ROWS, UNREACHABLE,
};
pub use waypoint::{
    augmented_cost, mpc_family, rollout, rollout_feasible, waypoint_sampler, write_rollout_csv, AnnulusSpace, MpcFamily,
    RolloutStep, WaypointProblem,
};

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

/// Planar workspace `[-1.6, 1.6] x [-1.2, 1.2]`.
pub const WORKSPACE_LO: [f64; 2] = [-1.6, -1.2];
pub const WORKSPACE_HI: [f64; 2] = [1.6, 1.2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnicycleState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl UnicycleState {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    pub v: f64,
    pub omega: f64,
}

impl ControlInput {
    pub const ZERO: ControlInput = ControlInput { v: 0.0, omega: 0.0 };
}

/// Constants of the waypoint problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaypointParams {
    pub horizon: usize,
    pub dt: f64,
    pub penalty: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub safety_radius: f64,
    pub obstacle_barrier: f64,
    pub v_max: f64,
    pub omega_max: f64,
    pub k_v: f64,
    pub k_omega: f64,
}

impl Default for WaypointParams {
    fn default() -> Self {
        Self {
            horizon: 5,
            dt: 0.033,
            penalty: 100.0,
            r_min: 0.05,
            r_max: 0.2,
            safety_radius: 0.18,
            obstacle_barrier: -5.0,
            v_max: 0.2,
            omega_max: PI,
            k_v: 2.0,
            k_omega: 4.0,
        }
    }
}

/// Wraps to `[0, 2 pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Wraps to `(-pi, pi]`.
pub fn wrap_heading_error(e: f64) -> f64 {
    let t = PI - (PI - e).rem_euclid(TAU);
    if t <= -PI {
        t + TAU
    } else {
        t
    }
}

/// One explicit Euler step of the unicycle. No state clamping.
pub fn dynamics_step(state: &UnicycleState, input: &ControlInput, dt: f64) -> UnicycleState {
    UnicycleState {
        x: state.x + input.v * state.theta.cos() * dt,
        y: state.y + input.v * state.theta.sin() * dt,
        theta: wrap_angle(state.theta + input.omega * dt),
    }
}

/// Proportional heading/speed law toward `w`, saturated to the input box.
pub fn lyapunov_controller(state: &UnicycleState, w: [f64; 2], params: &WaypointParams) -> ControlInput {
    let (dx, dy) = (w[0] - state.x, w[1] - state.y);
    let dist = dx.hypot(dy);
    if dist < 1e-6 {
        return ControlInput::ZERO;
    }
    let e = wrap_heading_error(dy.atan2(dx) - state.theta);
    ControlInput {
        v: (params.k_v * dist * e.cos()).clamp(-params.v_max, params.v_max),
        omega: (params.k_omega * e).clamp(-params.omega_max, params.omega_max),
    }
}

/// Safety margin: the obstacle value inside a static-obstacle cell,
/// otherwise distance to the other agent minus the safety radius.
pub fn barrier(agent: &UnicycleState, other: [f64; 2], env: &Environment, params: &WaypointParams) -> f64 {
    if env.in_obstacle(agent.position()) {
        params.obstacle_barrier
    } else {
        (agent.x - other[0]).hypot(agent.y - other[1]) - params.safety_radius
    }
}
