//! Closed-tour traveling salesman over planar waypoints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::percentile::Problem;
use crate::repetitive::ProblemFamily;
use crate::rng::{derive_seed, indexed_rng, tag};
use crate::space::{PermutationSpace, Space};
use rand::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TspInstance {
    pub waypoints: Vec<[f64; 2]>,
}

impl TspInstance {
    pub fn new(waypoints: Vec<[f64; 2]>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::domain(format!(
                "a tour needs at least 2 waypoints, got {}",
                waypoints.len()
            )));
        }
        if let Some(i) = waypoints.iter().position(|w| !(w[0].is_finite() && w[1].is_finite())) {
            return Err(Error::domain(format!("waypoint {i} is not finite")));
        }
        Ok(Self { waypoints })
    }

    /// `n` waypoints uniform in `[lo, hi]`.
    pub fn random(n: usize, lo: [f64; 2], hi: [f64; 2], seed: u64) -> Result<Self> {
        let mut rng = indexed_rng(seed, 0);
        let waypoints = (0..n)
            .map(|_| {
                [
                    lo[0] + (hi[0] - lo[0]) * rng.random::<f64>(),
                    lo[1] + (hi[1] - lo[1]) * rng.random::<f64>(),
                ]
            })
            .collect();
        Self::new(waypoints)
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: TspInstance = serde_json::from_str(text)?;
        Self::new(raw.waypoints)
    }
}

/// Length of the closed tour visiting `instance` in `order`.
pub fn tsp_cost(instance: &TspInstance, order: &[usize]) -> Result<f64> {
    let space = PermutationSpace::new(instance.len())?;
    if !space.contains(&order.to_vec()) {
        return Err(Error::domain(format!(
            "{order:?} is not a permutation of 0..{}",
            instance.len()
        )));
    }
    let n = instance.len();
    let dist = |a: usize, b: usize| {
        let (p, q) = (instance.waypoints[a], instance.waypoints[b]);
        (p[0] - q[0]).hypot(p[1] - q[1])
    };
    Ok(canonical_tour_length(order, n, dist))
}

/// Sums tour edges starting at waypoint 0 and heading toward its smaller
/// neighbour, so every rotation and reversal of a tour adds the same floats
/// in the same order.
fn canonical_tour_length(order: &[usize], n: usize, dist: impl Fn(usize, usize) -> f64) -> f64 {
    let k = order.iter().position(|&i| i == 0).expect("valid permutation");
    let next = order[(k + 1) % n];
    let prev = order[(k + n - 1) % n];
    let at = |j: usize| {
        if next <= prev {
            order[(k + j) % n]
        } else {
            order[(k + n - j) % n]
        }
    };
    let mut total = 0.0;
    for j in 0..n - 1 {
        total += dist(at(j), at(j + 1));
    }
    total + dist(at(0), at(n - 1))
}

/// A TSP instance as a percentile-solvable problem, with cached distances.
#[derive(Debug, Clone)]
pub struct TspProblem {
    instance: TspInstance,
    space: PermutationSpace,
    dist: Vec<f64>,
}

impl TspProblem {
    pub fn new(instance: TspInstance) -> Result<Self> {
        let n = instance.len();
        let space = PermutationSpace::new(n)?;
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let (p, q) = (instance.waypoints[i], instance.waypoints[j]);
                let d = (p[0] - q[0]).hypot(p[1] - q[1]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(Self {
            instance,
            space,
            dist,
        })
    }

    pub fn instance(&self) -> &TspInstance {
        &self.instance
    }

    /// Two-opt descent from `start` until no move shortens the tour.
    /// Heuristic only; never a substitute for exhaustive search.
    pub fn two_opt(&self, start: &[usize]) -> Vec<usize> {
        let n = self.instance.len();
        let mut tour = start.to_vec();
        let mut best = self.cost(&tour);
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..n.saturating_sub(1) {
                for j in i + 1..n {
                    tour[i..=j].reverse();
                    let c = self.cost(&tour);
                    if c < best {
                        best = c;
                        improved = true;
                    } else {
                        tour[i..=j].reverse();
                    }
                }
            }
        }
        tour
    }
}

impl Problem for TspProblem {
    type Space = PermutationSpace;

    fn space(&self) -> &PermutationSpace {
        &self.space
    }

    fn cost(&self, order: &Vec<usize>) -> f64 {
        let n = self.instance.len();
        canonical_tour_length(order, n, |a, b| self.dist[a * n + b])
    }
}

/// Random TSP instances with `n_waypoints` uniform in a box.
#[derive(Debug, Clone)]
pub struct TspFamily {
    pub n_waypoints: usize,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub seed: u64,
}

pub fn make_tsp_family(n_waypoints: usize, lo: [f64; 2], hi: [f64; 2], seed: u64) -> Result<TspFamily> {
    if n_waypoints < 2 {
        return Err(Error::domain(format!("n_waypoints must be >= 2, got {n_waypoints}")));
    }
    if !(lo[0] < hi[0] && lo[1] < hi[1]) {
        return Err(Error::domain(format!("empty waypoint box {lo:?}..{hi:?}")));
    }
    Ok(TspFamily {
        n_waypoints,
        lo,
        hi,
        seed,
    })
}

impl ProblemFamily for TspFamily {
    type Problem = TspProblem;

    fn instance(&self, instance_seed: u64) -> Result<TspProblem> {
        let seed = derive_seed(derive_seed(self.seed, tag::INSTANCE), instance_seed);
        TspProblem::new(TspInstance::random(self.n_waypoints, self.lo, self.hi, seed)?)
    }

    fn description(&self) -> String {
        format!(
            "tsp-{} in [{}, {}]x[{}, {}]",
            self.n_waypoints, self.lo[0], self.hi[0], self.lo[1], self.hi[1]
        )
    }
}
