//! Percentile optimization: best-of-N uniform sampling and the exact
//! relationship between the tail fraction `epsilon`, the sample count and the
//! confidence level.
//!
//! If `N` decisions are drawn uniformly and the cheapest is kept, then with
//! confidence `1 - (1 - epsilon)^N` at most an `epsilon` fraction of the space
//! is strictly better than it.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, indexed_rng, tag};
use crate::space::{Space, SpaceKind};

/// A bounded decision space paired with a bounded, deterministic cost.
///
/// `cost` must be a pure function: the solver calls it from several threads
/// at once and expects identical values for identical decisions.
pub trait Problem: Send + Sync {
    type Space: Space;

    fn space(&self) -> &Self::Space;

    fn cost(&self, decision: &Decision<Self>) -> f64;
}

/// Decision type of a problem.
pub type Decision<P> = <<P as Problem>::Space as Space>::Point;

/// A problem assembled from a space and a closure.
pub struct FnProblem<S, F> {
    space: S,
    cost: F,
}

impl<S, F> FnProblem<S, F>
where
    S: Space,
    F: Fn(&S::Point) -> f64 + Send + Sync,
{
    pub fn new(space: S, cost: F) -> Self {
        Self { space, cost }
    }
}

impl<S, F> Problem for FnProblem<S, F>
where
    S: Space,
    F: Fn(&S::Point) -> f64 + Send + Sync,
{
    type Space = S;

    fn space(&self) -> &S {
        &self.space
    }

    fn cost(&self, decision: &S::Point) -> f64 {
        (self.cost)(decision)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPoint<D> {
    pub decision: D,
    pub cost: f64,
}

/// The `(decision, cost)` pairs gathered by one percentile solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoSet<D> {
    pub points: Vec<SampledPoint<D>>,
    pub seed: u64,
}

impl<D> InfoSet<D> {
    pub fn n_p(&self) -> usize {
        self.points.len()
    }

    /// Index of the first point attaining the minimum cost.
    pub fn argmin(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, p) in self.points.iter().enumerate() {
            if best.is_none_or(|b| p.cost < self.points[b].cost) {
                best = Some(i);
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentileSolution<D> {
    pub best_index: usize,
    pub info: InfoSet<D>,
}

impl<D> PercentileSolution<D> {
    pub fn best(&self) -> &SampledPoint<D> {
        &self.info.points[self.best_index]
    }

    pub fn best_cost(&self) -> f64 {
        self.best().cost
    }
}

/// A tail fraction together with the confidence it is held at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSpec {
    pub epsilon: f64,
    pub confidence: f64,
}

impl ConfidenceSpec {
    pub fn new(epsilon: f64, confidence: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::domain(format!("epsilon {epsilon} outside [0, 1]")));
        }
        if !(0.0..1.0).contains(&confidence) {
            return Err(Error::domain(format!("confidence {confidence} outside [0, 1)")));
        }
        Ok(Self { epsilon, confidence })
    }

    /// Sample count needed to reach this confidence.
    pub fn samples(&self) -> Result<u64> {
        min_samples(self.epsilon, self.confidence)
    }
}

/// `1 - (1 - epsilon)^n`.
pub fn confidence_of(epsilon: f64, n: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::domain(format!("epsilon {epsilon} outside [0, 1]")));
    }
    if n < 1 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    // -expm1(n ln(1 - eps)) keeps precision when eps is tiny.
    Ok(-(n as f64 * (-epsilon).ln_1p()).exp_m1())
}

/// Smallest `n >= 1` with `confidence_of(epsilon, n) >= confidence`.
pub fn min_samples(epsilon: f64, confidence: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::domain(format!("epsilon {epsilon} outside (0, 1]")));
    }
    if !(0.0..1.0).contains(&confidence) {
        return Err(Error::domain(format!("confidence {confidence} outside [0, 1)")));
    }
    if epsilon == 1.0 {
        return Ok(1);
    }
    let guess = ((-confidence).ln_1p() / (-epsilon).ln_1p()).ceil();
    let mut n = if guess.is_finite() && guess >= 1.0 { guess as u64 } else { 1 };
    // the closed form can land one off when the ratio sits near an integer
    while n > 1 && confidence_of(epsilon, n - 1)? >= confidence {
        n -= 1;
    }
    while confidence_of(epsilon, n)? < confidence {
        n += 1;
    }
    Ok(n)
}

/// Evaluates `problem` at `decision`, rejecting non-finite costs.
pub fn evaluate<P: Problem + ?Sized>(problem: &P, decision: &Decision<P>, index: usize) -> Result<f64> {
    let value = problem.cost(decision);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Evaluation {
            index,
            decision: format!("{decision:?}"),
            value,
        })
    }
}

/// Draws `n` uniform decisions from the stream rooted at `stream_seed` and
/// evaluates them in parallel. Draw `i` depends only on `(stream_seed, i)`.
pub fn sample_points<P: Problem>(
    problem: &P,
    n: usize,
    stream_seed: u64,
) -> Result<Vec<SampledPoint<Decision<P>>>> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let decision = problem.space().sample(&mut indexed_rng(stream_seed, i as u64));
            let cost = evaluate(problem, &decision, i)?;
            Ok(SampledPoint { decision, cost })
        })
        .collect()
}

/// Best of `n_p` independent uniform draws.
pub fn percentile_solve<P: Problem>(
    problem: &P,
    n_p: usize,
    seed: u64,
) -> Result<PercentileSolution<Decision<P>>> {
    if n_p < 1 {
        return Err(Error::domain("n_p must be at least 1"));
    }
    let points = sample_points(problem, n_p, derive_seed(seed, tag::SOLVE))?;
    let info = InfoSet { points, seed };
    let best_index = info.argmin().expect("n_p >= 1");
    Ok(PercentileSolution { best_index, info })
}

/// How a volume fraction is measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Sampling {
    /// Enumerate every decision of a finite space, up to `limit` of them.
    Exact { limit: u64 },
    /// Fraction over `samples` uniform draws.
    MonteCarlo { samples: usize, seed: u64 },
}

/// 10!, the largest space enumerated by default.
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 3_628_800;

impl Sampling {
    pub fn exact() -> Self {
        Sampling::Exact {
            limit: DEFAULT_ENUMERATION_LIMIT,
        }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        Sampling::MonteCarlo { samples, seed }
    }
}

/// Number of contiguous index blocks an exact enumeration is split into.
const ENUMERATION_BLOCKS: u64 = 256;

/// Costs of every decision of a finite problem, in enumeration order.
pub fn exact_costs<P: Problem>(problem: &P, limit: u64) -> Result<Vec<f64>> {
    let finite = problem.space().as_finite().ok_or_else(|| {
        Error::Capacity(format!(
            "space {:?} cannot be enumerated",
            problem.space().kind()
        ))
    })?;
    let total = finite.cardinality();
    if total > limit {
        return Err(Error::Capacity(format!(
            "space has {total} decisions, above the enumeration limit {limit}"
        )));
    }
    let block = total.div_ceil(ENUMERATION_BLOCKS).max(1);
    let blocks: Vec<Vec<f64>> = (0..total.div_ceil(block))
        .into_par_iter()
        .map(|b| {
            let start = b * block;
            let end = (start + block).min(total);
            let mut costs = Vec::with_capacity((end - start) as usize);
            let mut failure = None;
            finite.visit_range(start, end, &mut |i, d| {
                if failure.is_some() {
                    return;
                }
                match evaluate(problem, d, i as usize) {
                    Ok(c) => costs.push(c),
                    Err(e) => failure = Some(e),
                }
            });
            match failure {
                Some(e) => Err(e),
                None => Ok(costs),
            }
        })
        .collect::<Result<_>>()?;
    Ok(blocks.concat())
}

/// Fraction of the space that is strictly cheaper than `candidate`.
pub fn estimate_better_fraction<P: Problem>(
    problem: &P,
    candidate: &Decision<P>,
    mode: Sampling,
) -> Result<f64> {
    let threshold = evaluate(problem, candidate, 0)?;
    let costs = match mode {
        Sampling::Exact { limit } => exact_costs(problem, limit)?,
        Sampling::MonteCarlo { samples, seed } => {
            if samples < 1 {
                return Err(Error::domain("Monte Carlo mode needs at least one sample"));
            }
            sample_points(problem, samples, derive_seed(seed, tag::ESTIMATE))?
                .into_iter()
                .map(|p| p.cost)
                .collect()
        }
    };
    let better = costs.iter().filter(|&&c| c < threshold).count();
    Ok(better as f64 / costs.len() as f64)
}

/// Sidecar metadata for an info-set CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoManifest {
    pub seed: u64,
    pub n_p: usize,
    pub space: SpaceKind,
    pub best_index: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct InfoRow {
    index: usize,
    cost: f64,
    decision: String,
}

impl<D: Serialize> InfoSet<D> {
    /// Writes `index,cost,decision` rows; `decision` is a JSON array.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for (index, p) in self.points.iter().enumerate() {
            w.serialize(InfoRow {
                index,
                cost: p.cost,
                decision: serde_json::to_string(&p.decision)?,
            })?;
        }
        if self.points.is_empty() {
            w.write_record(["index", "cost", "decision"])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn manifest(&self, space: SpaceKind) -> InfoManifest {
        InfoManifest {
            seed: self.seed,
            n_p: self.n_p(),
            space,
            best_index: self.argmin(),
        }
    }
}

impl<D: DeserializeOwned> InfoSet<D> {
    /// Reads rows written by [`InfoSet::write_csv`]; the seed comes from the manifest.
    pub fn read_csv<R: Read>(reader: R, manifest: &InfoManifest) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut points = Vec::new();
        for (expected, row) in r.deserialize::<InfoRow>().enumerate() {
            let row = row?;
            if row.index != expected {
                return Err(Error::config(
                    "index",
                    format!("row {expected} carries index {}", row.index),
                ));
            }
            points.push(SampledPoint {
                decision: serde_json::from_str(&row.decision)?,
                cost: row.cost,
            });
        }
        if points.len() != manifest.n_p {
            return Err(Error::config(
                "n_p",
                format!("manifest says {} points, csv has {}", manifest.n_p, points.len()),
            ));
        }
        Ok(Self {
            points,
            seed: manifest.seed,
        })
    }
}
