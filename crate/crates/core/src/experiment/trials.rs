//! Single-trial pipelines shared by the runner, the examples and the tests.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::certify::{certify_gap, exceedance_probability, subsample_info};
use crate::error::Result;
use crate::oracle::{GroundTruth, OracleConfig};
use crate::percentile::{min_samples, percentile_solve, Sampling};
use crate::rng::{derive_seed, tag};

/// Outcome of one solve-and-certify trial against a reference optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub group: String,
    pub trial: usize,
    pub seed: u64,
    pub solution_cost: f64,
    pub oracle_value: f64,
    pub true_gap: f64,
    pub v_star: f64,
    pub n_v: u64,
    pub epsilon: f64,
    /// Exact exceedance probability at the true gap, when it was computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub confidence: f64,
    pub success: bool,
    /// Coverage of the gap to a known analytic minimum, when one exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic_success: Option<bool>,
}

/// Seed of trial `i` in a run rooted at `seed`.
pub fn trial_seed(seed: u64, i: usize) -> u64 {
    derive_seed(derive_seed(seed, tag::TRIAL), i as u64)
}

/// Solve with `n_p` samples, keep a `chi` fraction, certify with `n_v`
/// fresh draws, and compare against the oracle's optimum.
///
/// The returned duration covers the solve and certification only.
#[allow(clippy::too_many_arguments)]
pub fn certify_trial<P: GroundTruth>(
    problem: &P,
    group: &str,
    trial: usize,
    seed: u64,
    n_p: usize,
    chi: f64,
    n_v: u64,
    epsilon: f64,
    oracle: &OracleConfig,
    known_minimum: Option<f64>,
) -> Result<(TrialRecord, Duration)> {
    let start = Instant::now();
    let solution = percentile_solve(problem, n_p, seed)?;
    let model = subsample_info(problem, &solution.info, chi, seed)?;
    let cert = certify_gap(&model, n_v, epsilon, seed)?;
    let elapsed = start.elapsed();

    let truth = problem.ground_truth(oracle, seed, Some(&solution.best().decision))?;
    let true_gap = (solution.best_cost() - truth.value).max(0.0);
    let record = TrialRecord {
        group: group.to_string(),
        trial,
        seed,
        solution_cost: solution.best_cost(),
        oracle_value: truth.value,
        true_gap,
        v_star: cert.v_star,
        n_v,
        epsilon,
        p: None,
        confidence: cert.confidence,
        success: cert.covers(true_gap),
        analytic_success: known_minimum.map(|m| cert.covers(solution.best_cost() - m)),
    };
    Ok((record, elapsed))
}

/// The finite-space version: the optimum comes from enumeration, `epsilon`
/// is set to the exact probability `p` of beating the true gap, and `n_v`
/// is the smallest count reaching `confidence` at that `p`.
///
/// A trial with `p = 0` cannot be certified at any `n_v`; it is recorded
/// with `n_v = 0` and counts as covered only when the true gap is zero.
#[allow(clippy::too_many_arguments)]
pub fn exact_certify_trial<P: GroundTruth>(
    problem: &P,
    optimum: f64,
    group: &str,
    trial: usize,
    seed: u64,
    n_p: usize,
    chi: f64,
    confidence: f64,
    limit: u64,
) -> Result<TrialRecord> {
    let solution = percentile_solve(problem, n_p, seed)?;
    let model = subsample_info(problem, &solution.info, chi, seed)?;
    let true_gap = (solution.best_cost() - optimum).max(0.0);
    let p = exceedance_probability(&model, true_gap, Sampling::Exact { limit })?;
    let mut record = TrialRecord {
        group: group.to_string(),
        trial,
        seed,
        solution_cost: solution.best_cost(),
        oracle_value: optimum,
        true_gap,
        v_star: 0.0,
        n_v: 0,
        epsilon: p,
        p: Some(p),
        confidence: 0.0,
        success: true_gap == 0.0,
        analytic_success: None,
    };
    if p > 0.0 {
        let n_v = min_samples(p, confidence)?;
        let cert = certify_gap(&model, n_v, p, seed)?;
        record.v_star = cert.v_star;
        record.n_v = n_v;
        record.confidence = cert.confidence;
        record.success = cert.covers(true_gap);
    }
    Ok(record)
}

/// Fraction of successful trials; 0 for an empty slice.
pub fn success_fraction(records: &[TrialRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().filter(|r| r.success).count() as f64 / records.len() as f64
}

/// Success fraction after each trial.
pub fn running_success(records: &[TrialRecord]) -> Vec<f64> {
    let mut hits = 0usize;
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            hits += r.success as usize;
            hits as f64 / (i + 1) as f64
        })
        .collect()
}

/// Empirical `q`-quantile (nearest rank) of unsorted values.
pub fn empirical_quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    Some(v[rank - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exhaustive_min;
    use crate::problems::{TspInstance, TspProblem};

    fn tsp6() -> TspProblem {
        TspProblem::new(TspInstance::random(6, [0.0, 0.0], [1.0, 1.0], 5).unwrap()).unwrap()
    }

    #[test]
    fn exact_trial_is_consistent() {
        let prob = tsp6();
        let opt = exhaustive_min(&prob, 1000).unwrap().value;
        let rec = exact_certify_trial(&prob, opt, "tsp6", 0, 11, 30, 0.1, 0.999, 1000).unwrap();
        assert!(rec.true_gap >= 0.0);
        let p = rec.p.unwrap();
        assert!((0.0..=1.0).contains(&p));
        if p > 0.0 {
            assert_eq!(rec.n_v, min_samples(p, 0.999).unwrap());
            assert!(rec.confidence >= 0.999);
        }
        let again = exact_certify_trial(&prob, opt, "tsp6", 0, 11, 30, 0.1, 0.999, 1000).unwrap();
        assert_eq!(rec, again);
    }

    #[test]
    fn certify_trial_on_tsp_with_exhaustive_oracle() {
        let prob = tsp6();
        let (rec, _) =
            certify_trial(&prob, "tsp6", 3, 8, 50, 0.1, 200, 0.01, &OracleConfig::exhaustive(), None).unwrap();
        let opt = exhaustive_min(&prob, 1000).unwrap().value;
        assert_eq!(rec.oracle_value, opt);
        assert_eq!(rec.success, rec.v_star >= rec.true_gap);
        assert!(rec.analytic_success.is_none());
    }

    #[test]
    fn summaries() {
        let mk = |s| TrialRecord {
            group: String::new(),
            trial: 0,
            seed: 0,
            solution_cost: 0.0,
            oracle_value: 0.0,
            true_gap: 0.0,
            v_star: 0.0,
            n_v: 1,
            epsilon: 0.1,
            p: None,
            confidence: 0.1,
            success: s,
            analytic_success: None,
        };
        let recs = vec![mk(true), mk(false), mk(true), mk(true)];
        assert_eq!(success_fraction(&recs), 0.75);
        assert_eq!(running_success(&recs), vec![1.0, 0.5, 2.0 / 3.0, 0.75]);
        assert_eq!(success_fraction(&[]), 0.0);
        assert_eq!(empirical_quantile(&[3.0, 1.0, 2.0, 4.0], 0.5), Some(2.0));
        assert_eq!(empirical_quantile(&[3.0, 1.0, 2.0, 4.0], 0.99), Some(4.0));
        assert_eq!(empirical_quantile(&[], 0.5), None);
    }
}
