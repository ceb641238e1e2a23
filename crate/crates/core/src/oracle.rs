//! Ground-truth optimal values for measuring true optimality gaps.
//!
//! Two oracles: exhaustive enumeration for finite spaces, and "refine-min"
//! for continuous ones (best of `n0` uniform samples, then projected descent
//! with finite-difference gradients and step halving).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::percentile::{evaluate, exact_costs, sample_points, Decision, FnProblem, Problem, DEFAULT_ENUMERATION_LIMIT};
use crate::problems::{BenchmarkProblem, TspProblem};
use crate::rng::{derive_seed, tag};
use crate::space::{BoxSpace, ContinuousSpace, PermutationSpace, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    Exhaustive,
    RefineMin,
    /// 2-opt local search; heuristic.
    TwoOpt,
}

impl OracleMethod {
    /// Slack below zero tolerated in a measured gap before the oracle is
    /// declared broken.
    pub fn tolerance(self) -> f64 {
        match self {
            OracleMethod::Exhaustive | OracleMethod::TwoOpt => 1e-9,
            OracleMethod::RefineMin => 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult<D> {
    pub value: f64,
    pub minimizer: D,
    pub method: OracleMethod,
    pub evaluations: u64,
    #[serde(default = "yes")]
    pub converged: bool,
}

fn yes() -> bool {
    true
}

/// Exact minimum of a finite problem; the first minimizer in enumeration order.
pub fn exhaustive_min<P: Problem>(problem: &P, limit: u64) -> Result<OracleResult<Decision<P>>> {
    let costs = exact_costs(problem, limit)?;
    let mut best = 0;
    for (i, c) in costs.iter().enumerate() {
        if *c < costs[best] {
            best = i;
        }
    }
    let finite = problem.space().as_finite().expect("exact_costs checked finiteness");
    let mut minimizer = None;
    finite.visit_range(best as u64, best as u64 + 1, &mut |_, d| minimizer = Some(d.clone()));
    Ok(OracleResult {
        value: costs[best],
        minimizer: minimizer.expect("index in range"),
        method: OracleMethod::Exhaustive,
        evaluations: costs.len() as u64,
        converged: true,
    })
}

/// Refine-min settings. Step sizes are relative to each coordinate's width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineConfig {
    pub n0: usize,
    pub fd_step: f64,
    pub initial_step: f64,
    pub shrink: f64,
    pub min_step: f64,
    pub max_iters: usize,
    /// Turn an exhausted iteration budget into an error.
    pub strict: bool,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            n0: 2000,
            fd_step: 1e-6,
            initial_step: 0.1,
            shrink: 0.5,
            min_step: 1e-9,
            max_iters: 500,
            strict: false,
        }
    }
}

impl RefineConfig {
    fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::config(field, msg));
        if self.n0 < 1 {
            return bad("n0", "must be at least 1");
        }
        if !(self.fd_step > 0.0) {
            return bad("fd_step", "must be positive");
        }
        if !(self.initial_step > 0.0) {
            return bad("initial_step", "must be positive");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink", "must lie in (0, 1)");
        }
        if !(self.min_step > 0.0) {
            return bad("min_step", "must be positive");
        }
        Ok(())
    }
}

/// Outcome of one local descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct Descent {
    pub point: Vec<f64>,
    pub value: f64,
    /// Incumbent value after each accepted step, starting with the initial value.
    pub trace: Vec<f64>,
    pub evaluations: u64,
    pub converged: bool,
}

/// Projected steepest descent from `start` with backtracking on the step.
///
/// The direction is the normalized gradient in width-scaled coordinates; a
/// step is taken only if it lowers the cost, so the incumbent never rises.
pub fn descend<P>(problem: &P, start: &[f64], cfg: &RefineConfig) -> Result<Descent>
where
    P: Problem,
    P::Space: ContinuousSpace,
{
    cfg.validate()?;
    let space = problem.space();
    let widths = space.widths();
    let dims = widths.len();
    let mut evaluations = 0u64;
    let mut eval = |x: &Vec<f64>| {
        evaluations += 1;
        evaluate(problem, x, 0)
    };

    let mut x = start.to_vec();
    let mut fx = eval(&x)?;
    let mut trace = vec![fx];
    let mut step = cfg.initial_step;
    let mut converged = false;
    let mut grad = vec![0.0; dims];

    for _ in 0..cfg.max_iters {
        if step < cfg.min_step {
            converged = true;
            break;
        }
        // central differences, one-sided where the probe leaves the space
        for i in 0..dims {
            let h = cfg.fd_step * widths[i];
            let mut plus = x.clone();
            plus[i] += h;
            let mut minus = x.clone();
            minus[i] -= h;
            let (fp, up) = if space.contains(&plus) { (eval(&plus)?, h) } else { (fx, 0.0) };
            let (fm, dm) = if space.contains(&minus) { (eval(&minus)?, h) } else { (fx, 0.0) };
            let span = up + dm;
            // scaled by width: derivative with respect to x_i / w_i
            grad[i] = if span > 0.0 { (fp - fm) / span * widths[i] } else { 0.0 };
        }
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            converged = true;
            break;
        }

        let mut moved = false;
        while step >= cfg.min_step {
            let mut cand: Vec<f64> = (0..dims).map(|i| x[i] - step * widths[i] * grad[i] / norm).collect();
            if space.project(&mut cand) {
                let fc = eval(&cand)?;
                if fc < fx {
                    x = cand;
                    fx = fc;
                    trace.push(fx);
                    step = (step / cfg.shrink).min(cfg.initial_step);
                    moved = true;
                    break;
                }
            }
            step *= cfg.shrink;
        }
        if !moved {
            converged = true;
            break;
        }
    }

    if !converged && cfg.strict {
        return Err(Error::NoConvergence {
            best_value: fx,
            best_point: x,
        });
    }
    Ok(Descent {
        point: x,
        value: fx,
        trace,
        evaluations,
        converged,
    })
}

/// Best of `cfg.n0` uniform samples (plus an optional known incumbent), then
/// local descent from the winner.
pub fn refine_min<P>(
    problem: &P,
    cfg: &RefineConfig,
    seed: u64,
    incumbent: Option<&Vec<f64>>,
) -> Result<OracleResult<Vec<f64>>>
where
    P: Problem,
    P::Space: ContinuousSpace,
{
    cfg.validate()?;
    let samples = sample_points(problem, cfg.n0, derive_seed(seed, tag::ORACLE))?;
    let mut evaluations = samples.len() as u64;
    let mut best = samples
        .into_iter()
        .reduce(|a, b| if b.cost < a.cost { b } else { a })
        .expect("n0 >= 1");
    if let Some(start) = incumbent {
        let c = evaluate(problem, start, 0)?;
        evaluations += 1;
        if c < best.cost {
            best.decision = start.clone();
            best.cost = c;
        }
    }
    let descent = descend(problem, &best.decision, cfg)?;
    Ok(OracleResult {
        value: descent.value,
        minimizer: descent.point,
        method: OracleMethod::RefineMin,
        evaluations: evaluations + descent.evaluations,
        converged: descent.converged,
    })
}

/// Which oracle to run and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum OracleConfig {
    Exhaustive {
        #[serde(default = "default_limit")]
        limit: u64,
    },
    RefineMin(RefineConfig),
    TwoOpt,
}

fn default_limit() -> u64 {
    DEFAULT_ENUMERATION_LIMIT
}

impl OracleConfig {
    pub fn exhaustive() -> Self {
        OracleConfig::Exhaustive {
            limit: DEFAULT_ENUMERATION_LIMIT,
        }
    }

    pub fn refine_min() -> Self {
        OracleConfig::RefineMin(RefineConfig::default())
    }

    pub fn method(&self) -> OracleMethod {
        match self {
            OracleConfig::Exhaustive { .. } => OracleMethod::Exhaustive,
            OracleConfig::RefineMin(_) => OracleMethod::RefineMin,
            OracleConfig::TwoOpt => OracleMethod::TwoOpt,
        }
    }
}

/// Problems whose optimum some oracle can compute.
pub trait GroundTruth: Problem {
    /// Optimal value per `cfg`. `incumbent` is a decision already known to
    /// the caller; oracles may start from it so they never report a value
    /// above it.
    fn ground_truth(
        &self,
        cfg: &OracleConfig,
        seed: u64,
        incumbent: Option<&Decision<Self>>,
    ) -> Result<OracleResult<Decision<Self>>>;
}

fn mismatch(cfg: &OracleConfig, kind: &str) -> Error {
    Error::config("oracle", format!("{:?} cannot serve a {kind} problem", cfg.method()))
}

/// Oracle dispatch for problems over a continuous space.
pub fn continuous_ground_truth<P>(
    problem: &P,
    cfg: &OracleConfig,
    seed: u64,
    incumbent: Option<&Vec<f64>>,
) -> Result<OracleResult<Vec<f64>>>
where
    P: Problem,
    P::Space: ContinuousSpace,
{
    match cfg {
        OracleConfig::RefineMin(rc) => refine_min(problem, rc, seed, incumbent),
        _ => Err(mismatch(cfg, "continuous")),
    }
}

/// Oracle dispatch for problems over permutations.
pub fn permutation_ground_truth<P>(
    problem: &P,
    cfg: &OracleConfig,
    incumbent: Option<&Vec<usize>>,
    two_opt: impl Fn(&[usize]) -> Vec<usize>,
) -> Result<OracleResult<Vec<usize>>>
where
    P: Problem<Space = PermutationSpace>,
{
    match cfg {
        OracleConfig::Exhaustive { limit } => exhaustive_min(problem, *limit),
        OracleConfig::TwoOpt => {
            let start: Vec<usize> = incumbent.cloned().unwrap_or_else(|| (0..problem.space().n()).collect());
            let tour = two_opt(&start);
            Ok(OracleResult {
                value: evaluate(problem, &tour, 0)?,
                minimizer: tour,
                method: OracleMethod::TwoOpt,
                evaluations: 0,
                converged: true,
            })
        }
        OracleConfig::RefineMin(_) => Err(mismatch(cfg, "permutation")),
    }
}

impl GroundTruth for BenchmarkProblem {
    fn ground_truth(&self, cfg: &OracleConfig, seed: u64, incumbent: Option<&Vec<f64>>) -> Result<OracleResult<Vec<f64>>> {
        continuous_ground_truth(self, cfg, seed, incumbent)
    }
}

impl GroundTruth for TspProblem {
    fn ground_truth(&self, cfg: &OracleConfig, _seed: u64, incumbent: Option<&Vec<usize>>) -> Result<OracleResult<Vec<usize>>> {
        permutation_ground_truth(self, cfg, incumbent, |t| self.two_opt(t))
    }
}

impl<F> GroundTruth for FnProblem<BoxSpace, F>
where
    F: Fn(&Vec<f64>) -> f64 + Send + Sync,
{
    fn ground_truth(&self, cfg: &OracleConfig, seed: u64, incumbent: Option<&Vec<f64>>) -> Result<OracleResult<Vec<f64>>> {
        continuous_ground_truth(self, cfg, seed, incumbent)
    }
}

impl<F> GroundTruth for FnProblem<PermutationSpace, F>
where
    F: Fn(&Vec<usize>) -> f64 + Send + Sync,
{
    fn ground_truth(&self, cfg: &OracleConfig, _seed: u64, incumbent: Option<&Vec<usize>>) -> Result<OracleResult<Vec<usize>>> {
        permutation_ground_truth(self, cfg, incumbent, |t| t.to_vec())
    }
}
