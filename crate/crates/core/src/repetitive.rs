//! Amortized gap bounds for families of repeatedly solved problems.
//!
//! Draw an instance, solve it with `n_p` uniform samples, measure the true
//! gap with an oracle. The maximum of `R` such gaps bounds the gap of a fresh
//! instance with probability at least `1 - epsilon`, at confidence
//! `1 - (1 - epsilon)^R`. The bound is an order statistic, so it holds for
//! any gap distribution.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{GroundTruth, OracleConfig, OracleMethod};
use crate::percentile::{confidence_of, percentile_solve};
use crate::rng::{derive_seed, indexed_rng, tag};

/// A seeded sampler of problem instances.
pub trait ProblemFamily: Send + Sync {
    type Problem: GroundTruth;

    /// Deterministic in `instance_seed`.
    fn instance(&self, instance_seed: u64) -> Result<Self::Problem>;

    fn description(&self) -> String;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSample {
    pub gamma: f64,
    pub instance_seed: u64,
    pub solution_cost: f64,
    pub oracle_value: f64,
    pub oracle_method: OracleMethod,
}

impl GapSample {
    /// Builds a sample from a solve and an oracle value. Gaps slightly below
    /// zero (within the oracle's tolerance) are clamped; anything lower means
    /// the oracle missed the optimum and is an error.
    pub fn measure(solution_cost: f64, oracle_value: f64, method: OracleMethod, instance_seed: u64) -> Result<Self> {
        let raw = solution_cost - oracle_value;
        if raw < -method.tolerance() {
            return Err(Error::Oracle {
                instance_seed,
                reason: format!(
                    "oracle value {oracle_value} is above the percentile solution {solution_cost}"
                ),
            });
        }
        Ok(Self {
            gamma: raw.max(0.0),
            instance_seed,
            solution_cost,
            oracle_value,
            oracle_method: method,
        })
    }
}

/// One gap draw: instance, percentile solve, oracle.
pub fn sample_gap<F: ProblemFamily>(
    family: &F,
    n_p: usize,
    oracle: &OracleConfig,
    instance_seed: u64,
) -> Result<GapSample> {
    let problem = family.instance(instance_seed)?;
    let solution = percentile_solve(&problem, n_p, instance_seed)?;
    let truth = problem
        .ground_truth(oracle, instance_seed, Some(&solution.best().decision))
        .map_err(|e| match e {
            e @ Error::Oracle { .. } => e,
            other => Error::Oracle {
                instance_seed,
                reason: other.to_string(),
            },
        })?;
    if !truth.converged {
        log::debug!("oracle did not converge for instance {instance_seed}; using best-so-far");
    }
    GapSample::measure(solution.best_cost(), truth.value, truth.method, instance_seed)
}

/// Anything that yields independent gap samples keyed by an instance seed.
pub trait GapSource: Send + Sync {
    fn draw(&self, instance_seed: u64) -> Result<GapSample>;

    fn describe(&self) -> String;
}

/// Gap draws from a problem family at a fixed `n_p`.
pub struct FamilyGaps<'a, F> {
    pub family: &'a F,
    pub n_p: usize,
    pub oracle: OracleConfig,
}

impl<'a, F: ProblemFamily> FamilyGaps<'a, F> {
    pub fn new(family: &'a F, n_p: usize, oracle: OracleConfig) -> Self {
        Self { family, n_p, oracle }
    }
}

impl<F: ProblemFamily> GapSource for FamilyGaps<'_, F> {
    fn draw(&self, instance_seed: u64) -> Result<GapSample> {
        sample_gap(self.family, self.n_p, &self.oracle, instance_seed)
    }

    fn describe(&self) -> String {
        self.family.description()
    }
}

/// Synthetic source whose gaps are uniform on `[lo, hi]`; its quantiles are
/// known in closed form, which makes coverage directly checkable.
#[derive(Debug, Clone, Copy)]
pub struct UniformGaps {
    pub lo: f64,
    pub hi: f64,
}

impl UniformGaps {
    /// The `q`-quantile of the gap distribution.
    pub fn quantile(&self, q: f64) -> f64 {
        self.lo + q * (self.hi - self.lo)
    }
}

impl GapSource for UniformGaps {
    fn draw(&self, instance_seed: u64) -> Result<GapSample> {
        let gamma = self.lo + (self.hi - self.lo) * indexed_rng(instance_seed, 0).random::<f64>();
        Ok(GapSample {
            gamma,
            instance_seed,
            solution_cost: gamma,
            oracle_value: 0.0,
            oracle_method: OracleMethod::Exhaustive,
        })
    }

    fn describe(&self) -> String {
        format!("uniform gaps on [{}, {}]", self.lo, self.hi)
    }
}

/// Instance seed of draw `i` in the stream `(seed, stream)`.
pub fn instance_seed(seed: u64, stream: u64, i: u64) -> u64 {
    derive_seed(derive_seed(seed, stream), i)
}

/// `count` independent gap draws, computed in parallel, returned in draw order.
pub fn collect_gaps<S: GapSource + ?Sized>(source: &S, count: usize, seed: u64, stream: u64) -> Result<Vec<GapSample>> {
    let results: Vec<Result<GapSample>> = (0..count as u64)
        .into_par_iter()
        .map(|i| source.draw(instance_seed(seed, stream, i)))
        .collect();
    let ok = results.iter().filter(|r| r.is_ok()).count();
    if ok < count {
        log::error!("{} of {count} gap samples failed for {}", count - ok, source.describe());
    }
    results.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitiveCertificate {
    pub gamma_star: f64,
    pub r: u64,
    pub epsilon: f64,
    pub confidence: f64,
    pub n_p: usize,
    pub family: String,
    pub seed: u64,
}

/// Certificate from already-drawn gap samples.
pub fn certificate_from_samples(
    samples: &[GapSample],
    epsilon: f64,
    n_p: usize,
    family: String,
    seed: u64,
) -> Result<RepetitiveCertificate> {
    if samples.is_empty() {
        return Err(Error::domain("a certificate needs at least one gap sample"));
    }
    let r = samples.len() as u64;
    Ok(RepetitiveCertificate {
        gamma_star: samples.iter().map(|s| s.gamma).fold(0.0, f64::max),
        r,
        epsilon,
        confidence: confidence_of(epsilon, r)?,
        n_p,
        family,
        seed,
    })
}

/// Draws `r` gap samples from `source` and keeps their maximum.
pub fn build_certificate_from<S: GapSource + ?Sized>(
    source: &S,
    r: u64,
    n_p: usize,
    epsilon: f64,
    seed: u64,
) -> Result<(RepetitiveCertificate, Vec<GapSample>)> {
    if r < 1 {
        return Err(Error::domain("r must be at least 1"));
    }
    confidence_of(epsilon, r)?;
    let samples = collect_gaps(source, r as usize, seed, tag::TRIAL)?;
    let cert = certificate_from_samples(&samples, epsilon, n_p, source.describe(), seed)?;
    Ok((cert, samples))
}

/// Certificate for a problem family at sample budget `n_p`.
pub fn build_certificate<F: ProblemFamily>(
    family: &F,
    r: u64,
    n_p: usize,
    epsilon: f64,
    oracle: &OracleConfig,
    seed: u64,
) -> Result<RepetitiveCertificate> {
    let source = FamilyGaps::new(family, n_p, oracle.clone());
    Ok(build_certificate_from(&source, r, n_p, epsilon, seed)?.0)
}

/// Fraction of samples whose gap is at most `gamma_star`.
pub fn coverage_of(samples: &[GapSample], gamma_star: f64) -> f64 {
    if samples.is_empty() {
        return 1.0;
    }
    samples.iter().filter(|s| s.gamma <= gamma_star).count() as f64 / samples.len() as f64
}

/// Out-of-sample check: fraction of `m` fresh draws covered by the certificate.
pub fn validate_coverage_from<S: GapSource + ?Sized>(
    source: &S,
    certificate: &RepetitiveCertificate,
    m: usize,
    seed: u64,
) -> Result<(f64, Vec<GapSample>)> {
    if m < 1 {
        return Err(Error::domain("m must be at least 1"));
    }
    let samples = collect_gaps(source, m, seed, tag::VALIDATE)?;
    Ok((coverage_of(&samples, certificate.gamma_star), samples))
}

pub fn validate_coverage<F: ProblemFamily>(
    family: &F,
    certificate: &RepetitiveCertificate,
    m: usize,
    n_p: usize,
    oracle: &OracleConfig,
    seed: u64,
) -> Result<f64> {
    let source = FamilyGaps::new(family, n_p, oracle.clone());
    Ok(validate_coverage_from(&source, certificate, m, seed)?.0)
}

/// Writes `trial,instance_seed,solution_cost,oracle_value,gamma` rows.
pub fn write_gaps_csv<W: Write>(samples: &[GapSample], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["trial", "instance_seed", "solution_cost", "oracle_value", "gamma"])?;
    for (trial, s) in samples.iter().enumerate() {
        w.write_record([
            trial.to_string(),
            s.instance_seed.to_string(),
            s.solution_cost.to_string(),
            s.oracle_value.to_string(),
            s.gamma.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
