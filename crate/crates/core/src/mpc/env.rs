use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{UnicycleState, WORKSPACE_HI, WORKSPACE_LO};
use crate::error::{Error, Result};
use crate::rng::indexed_rng;

pub const GRID_COLS: usize = 8;
pub const GRID_ROWS: usize = 5;
const CELL_W: f64 = (WORKSPACE_HI[0] - WORKSPACE_LO[0]) / GRID_COLS as f64;
const CELL_H: f64 = (WORKSPACE_HI[1] - WORKSPACE_LO[1]) / GRID_ROWS as f64;

/// Shortest-path value for waypoints in obstacle cells or cut off from every goal.
pub const UNREACHABLE: f64 = 1e6;

const MAX_REJECTIONS: usize = 10_000;

/// Grid cell as `[col, row]`.
pub type Cell = [usize; 2];

fn cell_index(c: Cell) -> usize {
    c[1] * GRID_COLS + c[0]
}

pub fn cell_center(c: Cell) -> [f64; 2] {
    [
        WORKSPACE_LO[0] + (c[0] as f64 + 0.5) * CELL_W,
        WORKSPACE_LO[1] + (c[1] as f64 + 0.5) * CELL_H,
    ]
}

/// Cell containing `p`, `None` outside the workspace. Points on an interior
/// cell boundary belong to the lower-index cell.
pub fn cell_of(p: [f64; 2]) -> Option<Cell> {
    let inside = |v: f64, lo: f64, hi: f64| (lo..=hi).contains(&v);
    if !(inside(p[0], WORKSPACE_LO[0], WORKSPACE_HI[0]) && inside(p[1], WORKSPACE_LO[1], WORKSPACE_HI[1])) {
        return None;
    }
    let idx = |v: f64, lo: f64, size: f64, n: usize| (((v - lo) / size).ceil() as isize - 1).clamp(0, n as isize - 1) as usize;
    Some([
        idx(p[0], WORKSPACE_LO[0], CELL_W, GRID_COLS),
        idx(p[1], WORKSPACE_LO[1], CELL_H, GRID_ROWS),
    ])
}

/// One operating environment: agent poses, obstacle cells, goal cells, and
/// the precomputed shortest-path distance from every cell to the nearest goal.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub x_a: UnicycleState,
    pub x_o: [f64; 2],
    pub so_cells: Vec<Cell>,
    pub goal_cells: Vec<Cell>,
    pub seed: u64,
    pub rejections: usize,
    distance: Vec<f64>,
}

/// On-disk form of an [`Environment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentFile {
    pub x_a: [f64; 3],
    pub x_o: [f64; 2],
    pub so_cells: Vec<Cell>,
    pub goal_cells: Vec<Cell>,
    pub seed: u64,
}

impl Environment {
    /// Builds an environment without checking the sampling invariants.
    pub fn new(x_a: UnicycleState, x_o: [f64; 2], so_cells: Vec<Cell>, goal_cells: Vec<Cell>, seed: u64) -> Result<Self> {
        for c in so_cells.iter().chain(&goal_cells) {
            if c[0] >= GRID_COLS || c[1] >= GRID_ROWS {
                return Err(Error::domain(format!("cell {c:?} outside the {GRID_COLS}x{GRID_ROWS} grid")));
            }
        }
        let distance = goal_distances(&so_cells, &goal_cells);
        Ok(Self {
            x_a,
            x_o,
            so_cells,
            goal_cells,
            seed,
            rejections: 0,
            distance,
        })
    }

    pub fn in_obstacle(&self, p: [f64; 2]) -> bool {
        cell_of(p).is_some_and(|c| self.so_cells.contains(&c))
    }

    pub fn in_goal(&self, p: [f64; 2]) -> bool {
        cell_of(p).is_some_and(|c| self.goal_cells.contains(&c))
    }

    /// Shortest-path distance from `cell` to the nearest goal.
    pub fn cell_distance(&self, cell: Cell) -> f64 {
        self.distance[cell_index(cell)]
    }

    /// Checks the three acceptance conditions, naming the first one that fails.
    pub fn check(&self, n_obstacles: usize, n_goals: usize) -> std::result::Result<(), String> {
        let distinct = |cells: &[Cell]| {
            let mut v = cells.to_vec();
            v.sort();
            v.dedup();
            v.len() == cells.len()
        };
        if self.so_cells.len() != n_obstacles || !distinct(&self.so_cells) {
            return Err(format!("need {n_obstacles} distinct obstacle cells"));
        }
        if self.goal_cells.len() != n_goals || !distinct(&self.goal_cells) {
            return Err(format!("need {n_goals} distinct goal cells"));
        }
        if self.so_cells.iter().any(|c| self.goal_cells.contains(c)) {
            return Err("obstacle and goal cells overlap".into());
        }
        for (name, p) in [("controlled agent", self.x_a.position()), ("other agent", self.x_o)] {
            if cell_of(p).is_none() {
                return Err(format!("{name} outside the workspace"));
            }
            if self.in_obstacle(p) || self.in_goal(p) {
                return Err(format!("{name} starts in an obstacle or goal cell"));
            }
        }
        let start = cell_of(self.x_a.position()).expect("checked above");
        if self.cell_distance(start) >= UNREACHABLE {
            return Err("no obstacle-free path from the agent to any goal".into());
        }
        Ok(())
    }

    pub fn to_file(&self) -> EnvironmentFile {
        EnvironmentFile {
            x_a: [self.x_a.x, self.x_a.y, self.x_a.theta],
            x_o: self.x_o,
            so_cells: self.so_cells.clone(),
            goal_cells: self.goal_cells.clone(),
            seed: self.seed,
        }
    }

    /// Loads and validates an environment with 8 obstacles and 3 goals.
    pub fn from_file(file: &EnvironmentFile) -> Result<Self> {
        let env = Self::new(
            UnicycleState::new(file.x_a[0], file.x_a[1], file.x_a[2]),
            file.x_o,
            file.so_cells.clone(),
            file.goal_cells.clone(),
            file.seed,
        )?;
        env.check(8, 3).map_err(Error::domain)?;
        Ok(env)
    }
}

/// Multi-source Dijkstra from the goals over obstacle-free cells,
/// 4-connected, edges weighted by cell-center distance.
fn goal_distances(so_cells: &[Cell], goal_cells: &[Cell]) -> Vec<f64> {
    let n = GRID_COLS * GRID_ROWS;
    let mut blocked = vec![false; n];
    for c in so_cells {
        blocked[cell_index(*c)] = true;
    }
    let mut dist = vec![UNREACHABLE; n];
    let mut done = vec![false; n];
    for g in goal_cells {
        if !blocked[cell_index(*g)] {
            dist[cell_index(*g)] = 0.0;
        }
    }
    // 40 nodes: a linear scan for the minimum is plenty
    loop {
        let next = (0..n)
            .filter(|&i| !done[i] && dist[i] < UNREACHABLE)
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]));
        let Some(u) = next else { break };
        done[u] = true;
        let (col, row) = (u % GRID_COLS, u / GRID_COLS);
        let mut relax = |c: usize, r: usize, w: f64| {
            let v = r * GRID_COLS + c;
            if !blocked[v] && dist[u] + w < dist[v] {
                dist[v] = dist[u] + w;
            }
        };
        if col > 0 {
            relax(col - 1, row, CELL_W);
        }
        if col + 1 < GRID_COLS {
            relax(col + 1, row, CELL_W);
        }
        if row > 0 {
            relax(col, row - 1, CELL_H);
        }
        if row + 1 < GRID_ROWS {
            relax(col, row + 1, CELL_H);
        }
    }
    for c in so_cells {
        dist[cell_index(*c)] = UNREACHABLE;
    }
    dist
}

/// Grid shortest-path distance from the waypoint's cell to the closest goal.
pub fn shortest_goal_distance(w: [f64; 2], env: &Environment) -> f64 {
    match cell_of(w) {
        Some(c) => env.cell_distance(c),
        None => UNREACHABLE,
    }
}

/// Rejection-samples an environment with 8 obstacles and 3 goals.
pub fn sample_environment(seed: u64) -> Result<Environment> {
    sample_environment_with(seed, 8, 3)
}

/// As [`sample_environment`] with configurable obstacle and goal counts.
pub fn sample_environment_with(seed: u64, n_obstacles: usize, n_goals: usize) -> Result<Environment> {
    let n_cells = GRID_COLS * GRID_ROWS;
    if n_obstacles + n_goals > n_cells || n_goals == 0 {
        return Err(Error::domain(format!(
            "cannot place {n_obstacles} obstacles and {n_goals} goals on {n_cells} cells"
        )));
    }
    for attempt in 0..MAX_REJECTIONS {
        let mut rng = indexed_rng(seed, attempt as u64);
        let picks = index::sample(&mut rng, n_cells, n_obstacles + n_goals).into_vec();
        let to_cell = |i: usize| [i % GRID_COLS, i / GRID_COLS];
        let so: Vec<Cell> = picks[..n_obstacles].iter().map(|&i| to_cell(i)).collect();
        let goals: Vec<Cell> = picks[n_obstacles..].iter().map(|&i| to_cell(i)).collect();
        let blocked = |p: [f64; 2]| cell_of(p).is_none_or(|c| so.contains(&c) || goals.contains(&c));
        // agents are drawn uniformly over the unblocked area
        let point = |rng: &mut rand_chacha::ChaCha8Rng| -> Result<[f64; 2]> {
            for _ in 0..MAX_REJECTIONS {
                let p = [
                    WORKSPACE_LO[0] + (WORKSPACE_HI[0] - WORKSPACE_LO[0]) * rng.random::<f64>(),
                    WORKSPACE_LO[1] + (WORKSPACE_HI[1] - WORKSPACE_LO[1]) * rng.random::<f64>(),
                ];
                if !blocked(p) {
                    return Ok(p);
                }
            }
            Err(Error::Rejection {
                what: format!("agent position for seed {seed}"),
                attempts: MAX_REJECTIONS,
            })
        };
        let a = point(&mut rng)?;
        let o = point(&mut rng)?;
        let theta = std::f64::consts::TAU * rng.random::<f64>();
        let mut env = Environment::new(UnicycleState::new(a[0], a[1], theta), o, so, goals, seed)?;
        if env.check(n_obstacles, n_goals).is_ok() {
            env.rejections = attempt;
            return Ok(env);
        }
    }
    Err(Error::Rejection {
        what: format!("environment for seed {seed}"),
        attempts: MAX_REJECTIONS,
    })
}
