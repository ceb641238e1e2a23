use std::f64::consts::TAU;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::env::{sample_environment, shortest_goal_distance, Environment, UNREACHABLE};
use super::{barrier, dynamics_step, lyapunov_controller, ControlInput, UnicycleState, WaypointParams, WORKSPACE_HI, WORKSPACE_LO};
use crate::error::{Error, Result};
use crate::oracle::{continuous_ground_truth, GroundTruth, OracleConfig, OracleResult};
use crate::percentile::Problem;
use crate::repetitive::ProblemFamily;
use crate::rng::{derive_seed, indexed_rng, tag};
use crate::space::{ContinuousSpace, Measure, Space, SpaceKind};

const MAX_REJECTIONS: usize = 10_000;

/// Waypoints `w` with `r_min <= |w - center| <= r_max`, inside the workspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSpace {
    pub center: [f64; 2],
    pub r_min: f64,
    pub r_max: f64,
}

impl AnnulusSpace {
    pub fn new(center: [f64; 2], r_min: f64, r_max: f64) -> Result<Self> {
        if !(0.0 <= r_min && r_min < r_max) {
            return Err(Error::domain(format!("bad annulus radii [{r_min}, {r_max}]")));
        }
        let inside = (0..2).all(|i| WORKSPACE_LO[i] <= center[i] && center[i] <= WORKSPACE_HI[i]);
        if !inside {
            return Err(Error::domain(format!("annulus center {center:?} outside the workspace")));
        }
        Ok(Self { center, r_min, r_max })
    }

    fn in_workspace(p: &[f64]) -> bool {
        (0..2).all(|i| WORKSPACE_LO[i] <= p[i] && p[i] <= WORKSPACE_HI[i])
    }

    /// Area-uniform draw by inverse transform on the squared radius, with
    /// rejection on the workspace box.
    pub fn try_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<[f64; 2]> {
        let (a, b) = (self.r_min * self.r_min, self.r_max * self.r_max);
        for _ in 0..MAX_REJECTIONS {
            let r = (a + (b - a) * rng.random::<f64>()).sqrt();
            let phi = TAU * rng.random::<f64>();
            let w = [self.center[0] + r * phi.cos(), self.center[1] + r * phi.sin()];
            if Self::in_workspace(&w) {
                return Ok(w);
            }
        }
        Err(Error::Rejection {
            what: format!("waypoint around {:?}", self.center),
            attempts: MAX_REJECTIONS,
        })
    }

    /// Area of the annulus clipped to the workspace, by quadrature over angle.
    fn area(&self) -> f64 {
        const STEPS: usize = 4096;
        let dphi = TAU / STEPS as f64;
        (0..STEPS)
            .map(|k| {
                let phi = (k as f64 + 0.5) * dphi;
                let (c, s) = (phi.cos(), phi.sin());
                // distance from the center to the box edge along this ray
                let mut reach = f64::INFINITY;
                for (d, lo, hi, p) in [(c, WORKSPACE_LO[0], WORKSPACE_HI[0], self.center[0]), (s, WORKSPACE_LO[1], WORKSPACE_HI[1], self.center[1])] {
                    if d > 0.0 {
                        reach = reach.min((hi - p) / d);
                    } else if d < 0.0 {
                        reach = reach.min((lo - p) / d);
                    }
                }
                let outer = reach.min(self.r_max);
                if outer > self.r_min {
                    0.5 * (outer * outer - self.r_min * self.r_min) * dphi
                } else {
                    0.0
                }
            })
            .sum()
    }
}

impl Space for AnnulusSpace {
    type Point = Vec<f64>;

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        // at least a quarter of the annulus lies in the box for any center
        // inside it, so running out of attempts means a broken invariant
        self.try_sample(rng).expect("annulus sampling").to_vec()
    }

    fn contains(&self, w: &Vec<f64>) -> bool {
        if w.len() != 2 || !Self::in_workspace(w) {
            return false;
        }
        let r = (w[0] - self.center[0]).hypot(w[1] - self.center[1]);
        self.r_min <= r && r <= self.r_max
    }

    fn measure(&self) -> Measure {
        Measure::Volume(self.area())
    }

    fn kind(&self) -> SpaceKind {
        SpaceKind::WaypointAnnulus
    }
}

impl ContinuousSpace for AnnulusSpace {
    fn widths(&self) -> Vec<f64> {
        vec![2.0 * self.r_max; 2]
    }

    fn project(&self, w: &mut [f64]) -> bool {
        let (dx, dy) = (w[0] - self.center[0], w[1] - self.center[1]);
        let r = dx.hypot(dy);
        if r > 0.0 {
            let target = r.clamp(self.r_min, self.r_max);
            w[0] = self.center[0] + dx * target / r;
            w[1] = self.center[1] + dy * target / r;
        }
        for i in 0..2 {
            w[i] = w[i].clamp(WORKSPACE_LO[i], WORKSPACE_HI[i]);
        }
        self.contains(&w.to_vec())
    }
}

/// One annulus waypoint around the agent.
pub fn waypoint_sampler(x_k: &UnicycleState, params: &WaypointParams, seed: u64) -> Result<[f64; 2]> {
    AnnulusSpace::new(x_k.position(), params.r_min, params.r_max)?.try_sample(&mut indexed_rng(seed, 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RolloutStep {
    pub j: usize,
    pub state: UnicycleState,
    pub input: ControlInput,
    pub h: f64,
}

/// Predicted states `x^0 .. x^H` under the waypoint controller, each with
/// the input applied from it and its barrier value. The other agent is
/// held still over the horizon.
pub fn rollout(x_k: &UnicycleState, w: [f64; 2], env: &Environment, params: &WaypointParams) -> Vec<RolloutStep> {
    let mut steps = Vec::with_capacity(params.horizon + 1);
    let mut state = *x_k;
    for j in 0..=params.horizon {
        let input = lyapunov_controller(&state, w, params);
        steps.push(RolloutStep {
            j,
            state,
            input,
            h: barrier(&state, env.x_o, env, params),
        });
        state = dynamics_step(&state, &input, params.dt);
    }
    steps
}

/// True iff the barrier stays nonnegative at every predicted step `1..=H`.
pub fn rollout_feasible(x_k: &UnicycleState, w: [f64; 2], env: &Environment, params: &WaypointParams) -> bool {
    let mut state = *x_k;
    for _ in 0..params.horizon {
        let u = lyapunov_controller(&state, w, params);
        state = dynamics_step(&state, &u, params.dt);
        if barrier(&state, env.x_o, env, params) < 0.0 {
            return false;
        }
    }
    true
}

/// Writes `j,x,y,theta,v,omega,h` rows.
pub fn write_rollout_csv<W: Write>(steps: &[RolloutStep], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["j", "x", "y", "theta", "v", "omega", "h"])?;
    for s in steps {
        w.write_record([
            s.j.to_string(),
            s.state.x.to_string(),
            s.state.y.to_string(),
            s.state.theta.to_string(),
            s.input.v.to_string(),
            s.input.omega.to_string(),
            s.h.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest-path distance to a goal, or the penalty when the rollout breaks
/// the barrier or the waypoint's cell is blocked or unreachable.
pub fn augmented_cost(w: [f64; 2], env: &Environment, x_k: &UnicycleState, params: &WaypointParams) -> f64 {
    if !rollout_feasible(x_k, w, env, params) {
        return params.penalty;
    }
    let s = shortest_goal_distance(w, env);
    if s >= UNREACHABLE {
        params.penalty
    } else {
        s
    }
}

/// Waypoint selection for one environment, from the agent's start pose.
#[derive(Debug, Clone)]
pub struct WaypointProblem {
    pub env: Environment,
    pub params: WaypointParams,
    space: AnnulusSpace,
}

impl WaypointProblem {
    pub fn new(env: Environment, params: WaypointParams) -> Result<Self> {
        let space = AnnulusSpace::new(env.x_a.position(), params.r_min, params.r_max)?;
        Ok(Self { env, params, space })
    }
}

impl Problem for WaypointProblem {
    type Space = AnnulusSpace;

    fn space(&self) -> &AnnulusSpace {
        &self.space
    }

    fn cost(&self, w: &Vec<f64>) -> f64 {
        augmented_cost([w[0], w[1]], &self.env, &self.env.x_a, &self.params)
    }
}

impl GroundTruth for WaypointProblem {
    fn ground_truth(&self, cfg: &OracleConfig, seed: u64, incumbent: Option<&Vec<f64>>) -> Result<OracleResult<Vec<f64>>> {
        continuous_ground_truth(self, cfg, seed, incumbent)
    }
}

/// Waypoint problems over randomly sampled environments.
#[derive(Debug, Clone)]
pub struct MpcFamily {
    pub params: WaypointParams,
    pub seed: u64,
}

pub fn mpc_family(params: WaypointParams, seed: u64) -> MpcFamily {
    MpcFamily { params, seed }
}

impl ProblemFamily for MpcFamily {
    type Problem = WaypointProblem;

    fn instance(&self, instance_seed: u64) -> Result<WaypointProblem> {
        let env = sample_environment(derive_seed(derive_seed(self.seed, tag::INSTANCE), instance_seed))?;
        WaypointProblem::new(env, self.params.clone())
    }

    fn description(&self) -> String {
        "nmpc-waypoint".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::percentile::{percentile_solve, sample_points};
    use std::f64::consts::PI;

    fn open_env(x_a: UnicycleState, x_o: [f64; 2]) -> Environment {
        Environment::new(x_a, x_o, vec![], vec![[7, 4]], 0).unwrap()
    }

    #[test]
    fn open_field_rollout_is_feasible() {
        let p = WaypointParams::default();
        let s = UnicycleState::new(0.0, 0.0, 0.0);
        let env = open_env(s, [1.4, 1.0]);
        assert!(rollout_feasible(&s, [0.15, 0.0], &env, &p));
    }

    #[test]
    fn coincident_agents_are_infeasible() {
        let p = WaypointParams::default();
        let s = UnicycleState::new(0.0, 0.0, 0.0);
        let env = open_env(s, [0.0, 0.0]);
        assert!(!rollout_feasible(&s, [0.15, 0.0], &env, &p));
        assert_eq!(augmented_cost([0.15, 0.0], &env, &s, &p), 100.0);
        let first = rollout(&s, [0.15, 0.0], &env, &p);
        assert!((first[0].h + 0.18).abs() < 1e-15);
    }

    #[test]
    fn driving_into_an_obstacle_cell_is_infeasible() {
        // obstacle cell [4, 2] spans x in [0, 0.4]; agent 1 cm to its left, facing it
        let p = WaypointParams::default();
        let s = UnicycleState::new(-0.01, 0.0, 0.0);
        let env = Environment::new(s, [-1.4, -1.0], vec![[4, 2]], vec![[0, 4]], 0).unwrap();
        assert!(!rollout_feasible(&s, [0.15, 0.0], &env, &p));
        // heading away is fine
        assert!(rollout_feasible(&s, [-0.15, 0.0], &env, &p));
        let trace = rollout(&s, [0.15, 0.0], &env, &p);
        assert_eq!(trace.len(), 6);
        assert!(trace.iter().any(|t| t.h == -5.0));
    }

    #[test]
    fn barrier_values() {
        let p = WaypointParams::default();
        let s = UnicycleState::new(0.1, 0.0, 0.0);
        let env = Environment::new(s, [0.1, 0.0], vec![[0, 0]], vec![[7, 4]], 0).unwrap();
        assert!((barrier(&s, [0.1, 0.0], &env, &p) + 0.18).abs() < 1e-15);
        assert!((barrier(&s, [0.1, 0.5], &env, &p) - 0.32).abs() < 1e-12);
        let inside = UnicycleState::new(-1.5, -1.1, 0.0);
        assert_eq!(barrier(&inside, [1.0, 1.0], &env, &p), -5.0);
    }

    #[test]
    fn goal_cell_waypoint_costs_zero() {
        let p = WaypointParams::default();
        let s = UnicycleState::new(1.15, 0.85, 0.0);
        let env = open_env(s, [-1.4, -1.0]);
        assert_eq!(augmented_cost([1.25, 0.85], &env, &s, &p), 0.0);
        // blocked waypoint cell gets the penalty, never the sentinel
        let s = UnicycleState::new(1.25, 0.85, PI);
        let env = Environment::new(s, [-1.4, -1.0], vec![[6, 4]], vec![[7, 4]], 0).unwrap();
        assert!(rollout_feasible(&s, [1.05, 0.85], &env, &p));
        assert_eq!(augmented_cost([1.05, 0.85], &env, &s, &p), 100.0);
    }

    #[test]
    fn annulus_samples_obey_constraints() {
        let p = WaypointParams::default();
        for (i, center) in [[0.0, 0.0], [1.55, 1.15], [-1.6, -1.2]].into_iter().enumerate() {
            let space = AnnulusSpace::new(center, p.r_min, p.r_max).unwrap();
            for k in 0..2000 {
                let w = space.sample(&mut indexed_rng(i as u64, k));
                assert!(space.contains(&w), "{w:?}");
            }
        }
        let w = waypoint_sampler(&UnicycleState::new(0.0, 0.0, 0.0), &p, 3).unwrap();
        let r = w[0].hypot(w[1]);
        assert!((0.05..=0.2).contains(&r));
    }

    #[test]
    fn annulus_radius_law() {
        // area-uniform: P(R <= r) = (r^2 - a^2) / (b^2 - a^2)
        let space = AnnulusSpace::new([0.0, 0.0], 0.05, 0.2).unwrap();
        let mut radii: Vec<f64> = (0..10_000u64)
            .map(|k| {
                let w = space.sample(&mut indexed_rng(77, k));
                w[0].hypot(w[1])
            })
            .collect();
        radii.sort_by(f64::total_cmp);
        let n = radii.len() as f64;
        let cdf = |r: f64| (r * r - 0.0025) / (0.04 - 0.0025);
        let ks = radii
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let f = cdf(r);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.03, "KS distance {ks}");
    }

    #[test]
    fn annulus_area() {
        let full = AnnulusSpace::new([0.0, 0.0], 0.05, 0.2).unwrap();
        let exact = std::f64::consts::PI * (0.04 - 0.0025);
        match full.measure() {
            Measure::Volume(a) => assert!((a - exact).abs() < 1e-9),
            m => panic!("{m:?}"),
        }
        let corner = AnnulusSpace::new([1.6, 1.2], 0.05, 0.2).unwrap();
        match corner.measure() {
            Measure::Volume(a) => assert!((a - exact / 4.0).abs() < 1e-3 * exact),
            m => panic!("{m:?}"),
        }
    }

    #[test]
    fn projection_stays_feasible() {
        let space = AnnulusSpace::new([1.5, 1.1], 0.05, 0.2).unwrap();
        let mut w = vec![1.5, 1.1 + 0.01];
        assert!(space.project(&mut w));
        assert!(space.contains(&w));
    }

    #[test]
    fn family_costs_are_bounded_and_replayable() {
        let fam = mpc_family(WaypointParams::default(), 4);
        for s in 0..40 {
            let prob = fam.instance(s).unwrap();
            let pts = sample_points(&prob, 200, s).unwrap();
            for p in &pts {
                assert!((0.0..=100.0).contains(&p.cost));
            }
            let again = fam.instance(s).unwrap();
            assert_eq!(prob.env, again.env);
        }
        let prob = fam.instance(1).unwrap();
        let a = percentile_solve(&prob, 100, 9).unwrap();
        let b = percentile_solve(&prob, 100, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rollout_csv_header() {
        let p = WaypointParams::default();
        let s = UnicycleState::new(0.0, 0.0, 0.0);
        let env = open_env(s, [1.4, 1.0]);
        let mut buf = Vec::new();
        write_rollout_csv(&rollout(&s, [0.1, 0.1], &env, &p), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("j,x,y,theta,v,omega,h\n"));
        assert_eq!(text.lines().count(), 7);
    }
}
