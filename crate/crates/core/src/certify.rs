//! Probabilistic upper bounds on the optimality gap of a percentile solution.
//!
//! A subset `D` of the solve's info set induces the variance function
//! `V(s) = min_{d in D} |J(s) - J(d)|`. A second round of `n_v` uniform draws
//! maximizes `V`; the maximum `v_star` exceeds the solution's optimality gap
//! with confidence `1 - (1 - epsilon)^n_v` whenever `epsilon` is at most the
//! probability of drawing a decision whose variance exceeds that gap.

use std::io::Write;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::percentile::{
    confidence_of, evaluate, exact_costs, min_samples, sample_points, Decision, InfoSet, Problem,
    Sampling, SampledPoint,
};
use crate::rng::{derive_seed, indexed_rng, tag};

/// Retained fraction of the info set used when the caller has no preference.
pub const DEFAULT_CHI: f64 = 0.1;
/// Tail fraction assumed when the exceedance probability is unknown.
pub const DEFAULT_EPSILON: f64 = 0.01;

/// Variance function built from a subset of an info set.
pub struct VarianceModel<'a, P: Problem> {
    problem: &'a P,
    d_set: Vec<SampledPoint<Decision<P>>>,
    d_indices: Vec<usize>,
    sorted_costs: Vec<f64>,
    chi: f64,
    solution_cost: f64,
}

/// Number of points kept at fraction `chi` of `n`: `max(1, floor(chi n))`.
pub fn subset_size(chi: f64, n: usize) -> usize {
    // the nudge keeps products like 0.29 * 100 from flooring to 28
    ((chi * n as f64 + 1e-9).floor() as usize).clamp(1, n)
}

fn check_chi(chi: f64) -> Result<()> {
    if chi > 0.0 && chi <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("chi {chi} outside (0, 1]")))
    }
}

/// Uniform subsample without replacement of `max(1, floor(chi |info|))` points.
pub fn subsample_info<'a, P: Problem>(
    problem: &'a P,
    info: &InfoSet<Decision<P>>,
    chi: f64,
    seed: u64,
) -> Result<VarianceModel<'a, P>> {
    check_chi(chi)?;
    if info.points.is_empty() {
        return Err(Error::domain("cannot subsample an empty info set"));
    }
    let n = info.n_p();
    let k = subset_size(chi, n);
    let mut indices = index::sample(&mut indexed_rng(derive_seed(seed, tag::SUBSAMPLE), 0), n, k).into_vec();
    indices.sort_unstable();
    let mut model = VarianceModel::with_indices(problem, info, &indices)?;
    model.chi = chi;
    Ok(model)
}

impl<'a, P: Problem> VarianceModel<'a, P> {
    /// Model over an explicit subset of `info`, given by point indices.
    pub fn with_indices(problem: &'a P, info: &InfoSet<Decision<P>>, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::domain("the retained subset must be nonempty"));
        }
        let mut seen = vec![false; info.n_p()];
        for &i in indices {
            if i >= info.n_p() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::domain(format!("bad or repeated subset index {i}")));
            }
        }
        let d_set: Vec<_> = indices.iter().map(|&i| info.points[i].clone()).collect();
        let mut sorted_costs: Vec<f64> = d_set.iter().map(|p| p.cost).collect();
        sorted_costs.sort_by(f64::total_cmp);
        let solution_cost = info.points[info.argmin().expect("nonempty")].cost;
        Ok(Self {
            problem,
            d_set,
            d_indices: indices.to_vec(),
            sorted_costs,
            chi: indices.len() as f64 / info.n_p() as f64,
            solution_cost,
        })
    }

    pub fn problem(&self) -> &'a P {
        self.problem
    }

    pub fn d_set(&self) -> &[SampledPoint<Decision<P>>] {
        &self.d_set
    }

    pub fn d_indices(&self) -> &[usize] {
        &self.d_indices
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    /// Best cost of the originating info set (the value being certified).
    pub fn solution_cost(&self) -> f64 {
        self.solution_cost
    }

    /// Variance of a decision whose cost is already known.
    pub fn variance_of_cost(&self, cost: f64) -> f64 {
        let c = &self.sorted_costs;
        let i = c.partition_point(|&v| v < cost);
        let above = c.get(i).map_or(f64::INFINITY, |v| v - cost);
        let below = if i > 0 { cost - c[i - 1] } else { f64::INFINITY };
        above.min(below)
    }

    /// `min |J(s) - J(d)|` over the retained subset; evaluates `J(s)` once.
    pub fn variance_at(&self, s: &Decision<P>) -> Result<f64> {
        Ok(self.variance_of_cost(evaluate(self.problem, s, 0)?))
    }

    /// Variances over the whole space (exact) or over a fresh uniform sample.
    pub fn variances(&self, mode: Sampling) -> Result<Vec<f64>> {
        let costs = match mode {
            Sampling::Exact { limit } => exact_costs(self.problem, limit)?,
            Sampling::MonteCarlo { samples, seed } => {
                if samples < 1 {
                    return Err(Error::domain("Monte Carlo mode needs at least one sample"));
                }
                sample_points(self.problem, samples, derive_seed(seed, tag::ESTIMATE))?
                    .into_iter()
                    .map(|p| p.cost)
                    .collect()
            }
        };
        Ok(costs.into_iter().map(|c| self.variance_of_cost(c)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub v_star: f64,
    pub n_v: u64,
    pub epsilon: f64,
    pub confidence: f64,
    pub solution_cost: f64,
    pub chi: f64,
    pub seed: u64,
    pub d_indices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl GapCertificate {
    /// `[solution_cost - v_star, solution_cost]`, which holds the optimum at
    /// the certificate's confidence.
    pub fn interval(&self) -> (f64, f64) {
        (self.solution_cost - self.v_star, self.solution_cost)
    }

    /// Whether the bound covers a known true gap.
    pub fn covers(&self, true_gap: f64) -> bool {
        self.v_star >= true_gap
    }
}

/// Maximizes the variance over `n_v` fresh uniform draws.
///
/// `epsilon` should not exceed the probability of drawing a decision whose
/// variance beats the true gap; that is the caller's assumption to make.
pub fn certify_gap<P: Problem>(
    model: &VarianceModel<'_, P>,
    n_v: u64,
    epsilon: f64,
    seed: u64,
) -> Result<GapCertificate> {
    if n_v < 1 {
        return Err(Error::domain("n_v must be at least 1"));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::domain(format!("epsilon {epsilon} outside (0, 1]")));
    }
    let confidence = confidence_of(epsilon, n_v)?;
    let points = sample_points(model.problem, n_v as usize, derive_seed(seed, tag::CERTIFY))?;
    let v_star = points
        .iter()
        .map(|p| model.variance_of_cost(p.cost))
        .fold(0.0, f64::max);
    let recommended = min_samples(epsilon, 0.95)?;
    let warning = (n_v < recommended).then(|| {
        format!("n_v = {n_v} is below the {recommended} samples needed for 95% confidence at epsilon = {epsilon}")
    });
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    Ok(GapCertificate {
        v_star,
        n_v,
        epsilon,
        confidence,
        solution_cost: model.solution_cost,
        chi: model.chi,
        seed,
        d_indices: model.d_indices.clone(),
        warning,
    })
}

/// Probability that a uniform decision has variance strictly above `threshold`.
pub fn exceedance_probability<P: Problem>(
    model: &VarianceModel<'_, P>,
    threshold: f64,
    mode: Sampling,
) -> Result<f64> {
    if !(threshold >= 0.0) {
        return Err(Error::domain(format!("threshold {threshold} must be >= 0")));
    }
    let v = model.variances(mode)?;
    Ok(fraction_above(&v, threshold))
}

fn fraction_above(variances: &[f64], threshold: f64) -> f64 {
    variances.iter().filter(|&&v| v > threshold).count() as f64 / variances.len() as f64
}

/// Volume fraction of the level set `{s : V(s) <= r}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetReport {
    pub radius: f64,
    pub fraction: f64,
    pub mode: Sampling,
}

pub fn level_set_report<P: Problem>(
    model: &VarianceModel<'_, P>,
    r: f64,
    mode: Sampling,
) -> Result<LevelSetReport> {
    Ok(level_set_sweep(model, &[r], mode)?.remove(0))
}

/// Level-set fractions for several radii over one shared sample.
pub fn level_set_sweep<P: Problem>(
    model: &VarianceModel<'_, P>,
    radii: &[f64],
    mode: Sampling,
) -> Result<Vec<LevelSetReport>> {
    if let Some(r) = radii.iter().find(|r| !(**r >= 0.0)) {
        return Err(Error::domain(format!("radius {r} must be >= 0")));
    }
    let v = model.variances(mode)?;
    Ok(radii
        .iter()
        .map(|&r| LevelSetReport {
            radius: r,
            fraction: 1.0 - fraction_above(&v, r),
            mode,
        })
        .collect())
}

/// Writes a sweep as `r,fraction` CSV.
pub fn write_sweep_csv<W: Write>(reports: &[LevelSetReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["r", "fraction"])?;
    for rep in reports {
        w.write_record([rep.radius.to_string(), rep.fraction.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
