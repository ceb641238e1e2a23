//! Seeded, resumable experiment runs.
//!
//! A run is fully described by its [`ExperimentConfig`]. With an output
//! directory set, each finished trial is appended to `records.jsonl` in trial
//! order; re-running the same config picks up after the last complete
//! record, and a finished run is replayed without recomputation.

mod config;
mod journal;
mod plot;
pub mod trials;

pub use config::{ExperimentConfig, ExperimentKind, FamilyConfig, ProblemConfig};
pub use plot::{emit_plot_data, PlotKind};
pub use trials::TrialRecord;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::certify::{exceedance_probability, level_set_sweep, subsample_info};
use crate::error::{Error, Result};
use crate::mpc::{mpc_family, WaypointParams};
use crate::oracle::{exhaustive_min, GroundTruth, OracleConfig};
use crate::percentile::{confidence_of, min_samples, percentile_solve, Problem, Sampling, DEFAULT_ENUMERATION_LIMIT};
use crate::problems::{benchmark_by_name, make_tsp_family, Benchmark, BenchmarkProblem, TspInstance, TspProblem};
use crate::repetitive::{instance_seed, FamilyGaps, GapSource, UniformGaps};
use crate::rng::{derive_seed, tag};
use crate::space::Space;
use journal::Journal;
use trials::{certify_trial, exact_certify_trial, running_success, success_fraction, trial_seed};

/// Which half of a repetitive-bound run a gap sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapPhase {
    Build,
    Validate,
}

/// One line of `records.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
pub enum Record {
    Sample {
        index: usize,
        cost: f64,
        decision: serde_json::Value,
    },
    Trial(TrialRecord),
    Chi {
        chi: f64,
        d_size: usize,
        true_gap: f64,
        p: f64,
    },
    Level {
        chi: f64,
        r: f64,
        fraction: f64,
    },
    Gap {
        n_p: usize,
        phase: GapPhase,
        trial: usize,
        instance_seed: u64,
        solution_cost: f64,
        oracle_value: f64,
        gamma: f64,
    },
}

/// Wall-clock measurements; never part of the reproducible outputs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
    pub phases: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub records: Vec<Record>,
    pub summary: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
    #[serde(skip)]
    pub timings: Timings,
}

impl RunReport {
    pub fn trial_records(&self) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter_map(|r| match r {
            Record::Trial(t) => Some(t),
            _ => None,
        })
    }
}

enum AnyProblem {
    Benchmark(BenchmarkProblem),
    Tsp(TspProblem),
}

macro_rules! with_problem {
    ($any:expr, |$p:ident| $body:expr) => {
        match $any {
            AnyProblem::Benchmark($p) => $body,
            AnyProblem::Tsp($p) => $body,
        }
    };
}

impl AnyProblem {
    fn build(cfg: &ProblemConfig, seed: u64) -> Result<Self> {
        Ok(match cfg {
            ProblemConfig::Benchmark { name } => AnyProblem::Benchmark(benchmark_by_name(name.name())?),
            ProblemConfig::Tsp {
                waypoints,
                points,
                lo,
                hi,
            } => {
                let instance = match (points, waypoints) {
                    (Some(pts), _) => TspInstance::new(pts.clone())?,
                    (None, Some(n)) => TspInstance::random(*n, *lo, *hi, derive_seed(seed, tag::INSTANCE))?,
                    (None, None) => return Err(Error::config("problem.waypoints", "give a waypoint count or points")),
                };
                AnyProblem::Tsp(TspProblem::new(instance)?)
            }
        })
    }

    fn label(&self) -> String {
        match self {
            AnyProblem::Benchmark(b) => b.spec().benchmark.name().to_string(),
            AnyProblem::Tsp(t) => format!("tsp{}", t.instance().len()),
        }
    }

    fn known_minimum(&self) -> Option<f64> {
        match self {
            AnyProblem::Benchmark(b) => Some(b.spec().known_minimum),
            AnyProblem::Tsp(_) => None,
        }
    }

    fn default_oracle(&self) -> OracleConfig {
        match self {
            AnyProblem::Benchmark(_) => OracleConfig::refine_min(),
            AnyProblem::Tsp(t) if t.instance().len() <= 10 => OracleConfig::exhaustive(),
            AnyProblem::Tsp(_) => OracleConfig::TwoOpt,
        }
    }

    fn default_sampling(&self, seed: u64) -> Sampling {
        match self {
            AnyProblem::Tsp(t) if t.instance().len() <= 10 => Sampling::exact(),
            _ => Sampling::monte_carlo(10_000, derive_seed(seed, tag::ESTIMATE)),
        }
    }
}

/// Runs the configured experiment, writing artifacts when `config.out` is set.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    let out = config.out.as_deref();
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    let mut journal = Journal::open(out, config)?;
    let mut ctx = Ctx {
        config,
        summary: BTreeMap::new(),
        timings: Timings::default(),
        passed: None,
    };
    match config.experiment {
        ExperimentKind::Solve => ctx.solve(&mut journal)?,
        ExperimentKind::Certify => ctx.certify(&mut journal)?,
        ExperimentKind::ChiSweep => ctx.chi_sweep(&mut journal)?,
        ExperimentKind::Table1 => ctx.table1(&mut journal)?,
        ExperimentKind::TspFig2 => ctx.tsp_fig2(&mut journal)?,
        ExperimentKind::MpcFig4 | ExperimentKind::Validate => ctx.repetitive(&mut journal)?,
    }
    ctx.timings.total_ms = ms(start.elapsed());
    let report = RunReport {
        version: crate::VERSION.to_string(),
        config: config.clone(),
        records: journal.into_records(),
        summary: ctx.summary,
        threshold: config.threshold_or_default(),
        passed: ctx.passed,
        timings: ctx.timings,
    };
    if let Some(dir) = out {
        write_report(&report, dir)?;
    }
    Ok(report)
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn write_report(report: &RunReport, dir: &Path) -> Result<()> {
    serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join("report.json"))?), report)?;
    serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join("timings.json"))?), &report.timings)?;
    match report.config.experiment {
        ExperimentKind::Certify | ExperimentKind::Table1 | ExperimentKind::TspFig2 => {
            emit_plot_data(report, PlotKind::Fig2, dir)?;
        }
        ExperimentKind::MpcFig4 | ExperimentKind::Validate => {
            emit_plot_data(report, PlotKind::Fig4, dir)?;
        }
        _ => {}
    }
    Ok(())
}

struct Ctx<'a> {
    config: &'a ExperimentConfig,
    summary: BTreeMap<String, f64>,
    timings: Timings,
    passed: Option<bool>,
}

impl Ctx<'_> {
    fn problem(&self) -> Result<AnyProblem> {
        let p = self.config.problem.as_ref().ok_or_else(|| Error::config("problem", "missing"))?;
        AnyProblem::build(p, self.config.seed)
    }

    fn n_p(&self) -> usize {
        self.config.n_p.unwrap_or(1)
    }

    fn judge(&mut self, fractions: &[f64]) {
        if let Some(t) = self.config.threshold_or_default() {
            self.passed = Some(!fractions.is_empty() && fractions.iter().all(|&f| f >= t));
        }
    }

    fn solve(&mut self, journal: &mut Journal) -> Result<()> {
        let problem = self.problem()?;
        let seed = self.config.seed;
        let n_p = self.n_p();
        let start = Instant::now();
        let (records, best) = with_problem!(&problem, |p| {
            let sol = percentile_solve(p, n_p, seed)?;
            if let Some(dir) = &self.config.out {
                sol.info.write_csv(File::create(dir.join("info.csv"))?)?;
                let manifest = sol.info.manifest(p.space().kind());
                serde_json::to_writer_pretty(File::create(dir.join("manifest.json"))?, &manifest)?;
            }
            let records = sol
                .info
                .points
                .iter()
                .enumerate()
                .map(|(index, pt)| {
                    Ok(Record::Sample {
                        index,
                        cost: pt.cost,
                        decision: serde_json::to_value(&pt.decision)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            (records, (sol.best_index, sol.best_cost()))
        });
        self.timings.phases.insert("solve_ms".into(), ms(start.elapsed()));
        journal.replace(records)?;
        self.summary.insert("n_p".into(), n_p as f64);
        self.summary.insert("best_index".into(), best.0 as f64);
        self.summary.insert("best_cost".into(), best.1);
        if let Some(eps) = self.config.epsilon {
            self.summary.insert("confidence".into(), confidence_of(eps, n_p as u64)?);
        }
        Ok(())
    }

    fn certify(&mut self, journal: &mut Journal) -> Result<()> {
        let problem = self.problem()?;
        let label = problem.label();
        let oracle = self.config.oracle.clone().unwrap_or_else(|| problem.default_oracle());
        let known = problem.known_minimum();
        let trials = self.config.trials_or(1);
        let fraction = with_problem!(&problem, |p| self.certify_group(journal, p, &label, 0, trials, &oracle, known))?;
        self.judge(&[fraction]);
        Ok(())
    }

    /// Runs `trials` certify trials as journal entries `offset..offset + trials`.
    #[allow(clippy::too_many_arguments)]
    fn certify_group<P: GroundTruth>(
        &mut self,
        journal: &mut Journal,
        problem: &P,
        label: &str,
        offset: usize,
        trials: usize,
        oracle: &OracleConfig,
        known: Option<f64>,
    ) -> Result<f64> {
        let cfg = self.config;
        let (n_p, n_v, chi, eps) = (self.n_p(), cfg.n_v.unwrap_or(1), cfg.chi_or_default(), cfg.epsilon_or_default());
        let durations = journal.fill(offset + trials, |i| {
            let t = i - offset;
            let (rec, d) =
                certify_trial(problem, label, t, trial_seed(cfg.seed, t), n_p, chi, n_v, eps, oracle, known)?;
            Ok((Record::Trial(rec), Some(d)))
        })?;
        let recs: Vec<TrialRecord> = journal.trials(offset..offset + trials);
        let fraction = success_fraction(&recs);
        let mean = |f: &dyn Fn(&TrialRecord) -> f64| recs.iter().map(f).sum::<f64>() / recs.len() as f64;
        self.summary.insert(format!("success_{label}"), fraction);
        self.summary.insert(format!("mean_v_star_{label}"), mean(&|r| r.v_star));
        self.summary.insert(format!("mean_true_gap_{label}"), mean(&|r| r.true_gap));
        self.summary.insert(format!("expected_success_{label}"), confidence_of(eps, n_v)?);
        if known.is_some() {
            let hits = recs.iter().filter(|r| r.analytic_success == Some(true)).count();
            self.summary
                .insert(format!("analytic_success_{label}"), hits as f64 / recs.len() as f64);
        }
        if !durations.is_empty() {
            let mean_ms = durations.iter().map(|d| ms(*d)).sum::<f64>() / durations.len() as f64;
            self.timings.phases.insert(format!("mean_trial_ms_{label}"), mean_ms);
        }
        Ok(fraction)
    }

    fn table1(&mut self, journal: &mut Journal) -> Result<()> {
        let benchmarks = self.config.benchmarks.clone().unwrap_or_else(|| Benchmark::ALL.to_vec());
        let trials = self.config.trials_or(1);
        let mut fractions = Vec::new();
        for (k, b) in benchmarks.iter().enumerate() {
            let problem = benchmark_by_name(b.name())?;
            let oracle = self.config.oracle.clone().unwrap_or_else(OracleConfig::refine_min);
            let known = Some(problem.spec().known_minimum);
            fractions.push(self.certify_group(journal, &problem, b.name(), k * trials, trials, &oracle, known)?);
        }
        if let Some(dir) = &self.config.out {
            self.write_table1(&benchmarks, dir)?;
        }
        self.judge(&fractions);
        Ok(())
    }

    fn write_table1(&self, benchmarks: &[Benchmark], dir: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(dir.join("table1.csv"))?;
        w.write_record([
            "benchmark",
            "n_p",
            "n_v",
            "expected_success",
            "success_fraction",
            "analytic_success_fraction",
            "trials",
            "mean_runtime_ms",
        ])?;
        for b in benchmarks {
            let name = b.name();
            let get = |key: &str| self.summary.get(&format!("{key}_{name}")).copied();
            let timing = self.timings.phases.get(&format!("mean_trial_ms_{name}"));
            w.write_record([
                name.to_string(),
                self.n_p().to_string(),
                self.config.n_v.unwrap_or(1).to_string(),
                get("expected_success").unwrap_or(f64::NAN).to_string(),
                get("success").unwrap_or(f64::NAN).to_string(),
                get("analytic_success").unwrap_or(f64::NAN).to_string(),
                self.config.trials_or(1).to_string(),
                timing.map_or(String::new(), |t| format!("{t:.3}")),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    fn tsp_fig2(&mut self, journal: &mut Journal) -> Result<()> {
        let AnyProblem::Tsp(problem) = self.problem()? else {
            return Err(Error::config("problem", "tsp-fig2 needs a tsp problem"));
        };
        let cfg = self.config;
        let limit = match &cfg.oracle {
            Some(OracleConfig::Exhaustive { limit }) => *limit,
            None => DEFAULT_ENUMERATION_LIMIT,
            Some(_) => return Err(Error::config("oracle", "tsp-fig2 needs the exhaustive oracle")),
        };
        let optimum = exhaustive_min(&problem, limit)?.value;
        let label = format!("tsp{}", problem.instance().len());
        let (n_p, chi, conf, trials) =
            (self.n_p(), cfg.chi_or_default(), cfg.confidence.unwrap_or(0.999), cfg.trials_or(1));
        journal.fill(trials, |t| {
            let rec = exact_certify_trial(&problem, optimum, &label, t, trial_seed(cfg.seed, t), n_p, chi, conf, limit)?;
            Ok((Record::Trial(rec), None))
        })?;
        let recs = journal.trials(0..trials);
        let fraction = success_fraction(&recs);
        let n = recs.len() as f64;
        self.summary.insert("optimum".into(), optimum);
        self.summary.insert("success_fraction".into(), fraction);
        self.summary
            .insert("mean_p".into(), recs.iter().filter_map(|r| r.p).sum::<f64>() / n);
        self.summary
            .insert("mean_n_v".into(), recs.iter().map(|r| r.n_v as f64).sum::<f64>() / n);
        self.summary
            .insert("zero_p_trials".into(), recs.iter().filter(|r| r.p == Some(0.0)).count() as f64);
        if let Some(dir) = &cfg.out {
            let mut w = csv::Writer::from_path(dir.join("fig2_running.csv"))?;
            w.write_record(["trial", "success_fraction"])?;
            for (i, f) in running_success(&recs).into_iter().enumerate() {
                w.write_record([i.to_string(), f.to_string()])?;
            }
            w.flush()?;
        }
        self.judge(&[fraction]);
        Ok(())
    }

    fn chi_sweep(&mut self, journal: &mut Journal) -> Result<()> {
        let problem = self.problem()?;
        let cfg = self.config;
        let oracle = cfg.oracle.clone().unwrap_or_else(|| problem.default_oracle());
        let mode = cfg.sampling.unwrap_or_else(|| problem.default_sampling(cfg.seed));
        let chis = cfg.chi_values.clone().unwrap_or_default();
        let radii = cfg.radii.clone().unwrap_or_default();
        let n_p = self.n_p();
        let records = with_problem!(&problem, |p| {
            let sol = percentile_solve(p, n_p, cfg.seed)?;
            let truth = p.ground_truth(&oracle, cfg.seed, Some(&sol.best().decision))?;
            let true_gap = (sol.best_cost() - truth.value).max(0.0);
            let mut records = Vec::new();
            for &chi in &chis {
                let model = subsample_info(p, &sol.info, chi, cfg.seed)?;
                let prob = exceedance_probability(&model, true_gap, mode)?;
                records.push(Record::Chi {
                    chi,
                    d_size: model.d_set().len(),
                    true_gap,
                    p: prob,
                });
                for rep in level_set_sweep(&model, &radii, mode)? {
                    records.push(Record::Level {
                        chi,
                        r: rep.radius,
                        fraction: rep.fraction,
                    });
                }
            }
            records
        });
        for r in &records {
            if let Record::Chi { chi, p, true_gap, .. } = r {
                self.summary.insert(format!("p_chi_{chi}"), *p);
                self.summary.insert("true_gap".into(), *true_gap);
            }
        }
        if let Some(dir) = &cfg.out {
            let mut w = csv::Writer::from_path(dir.join("chi_p.csv"))?;
            w.write_record(["chi", "d_size", "true_gap", "p"])?;
            let mut s = csv::Writer::from_path(dir.join("sweep.csv"))?;
            s.write_record(["chi", "r", "fraction"])?;
            for r in &records {
                match r {
                    Record::Chi { chi, d_size, true_gap, p } => {
                        w.write_record([chi.to_string(), d_size.to_string(), true_gap.to_string(), p.to_string()])?
                    }
                    Record::Level { chi, r, fraction } => {
                        s.write_record([chi.to_string(), r.to_string(), fraction.to_string()])?
                    }
                    _ => {}
                }
            }
            w.flush()?;
            s.flush()?;
        }
        journal.replace(records)?;
        Ok(())
    }

    fn repetitive(&mut self, journal: &mut Journal) -> Result<()> {
        let cfg = self.config;
        let family = match (&cfg.family, cfg.experiment) {
            (Some(f), _) => f.clone(),
            (None, _) => FamilyConfig::Mpc {
                params: WaypointParams::default(),
            },
        };
        if cfg.experiment == ExperimentKind::MpcFig4 && !matches!(family, FamilyConfig::Mpc { .. }) {
            return Err(Error::config("family", "mpc-fig4 runs on the mpc family"));
        }
        let eps = cfg.epsilon_or_default();
        let r = match cfg.r {
            Some(r) => r,
            None => min_samples(eps, cfg.confidence.unwrap_or(0.99))?,
        } as usize;
        let m = cfg.validation.unwrap_or(1);
        let n_ps = match cfg.experiment {
            ExperimentKind::MpcFig4 => cfg.n_p_values.clone().unwrap_or_default(),
            _ => vec![self.n_p()],
        };
        let oracle = cfg.oracle.clone().unwrap_or_else(|| match &family {
            FamilyConfig::Tsp { waypoints, .. } if *waypoints <= 10 => OracleConfig::exhaustive(),
            FamilyConfig::Tsp { .. } => OracleConfig::TwoOpt,
            _ => OracleConfig::refine_min(),
        });
        let mut coverages = Vec::new();
        for (k, &n_p) in n_ps.iter().enumerate() {
            let source: Box<dyn GapSource + '_> = match &family {
                FamilyConfig::Mpc { params } => {
                    Box::new(OwnedFamilyGaps::new(mpc_family(params.clone(), cfg.seed), n_p, oracle.clone()))
                }
                FamilyConfig::Tsp { waypoints, lo, hi } => Box::new(OwnedFamilyGaps::new(
                    make_tsp_family(*waypoints, *lo, *hi, cfg.seed)?,
                    n_p,
                    oracle.clone(),
                )),
                FamilyConfig::Uniform { lo, hi } => Box::new(UniformGaps { lo: *lo, hi: *hi }),
            };
            let offset = k * (r + m);
            let start = Instant::now();
            journal.fill(offset + r + m, |i| {
                let j = i - offset;
                let (phase, trial, stream) = if j < r {
                    (GapPhase::Build, j, tag::TRIAL)
                } else {
                    (GapPhase::Validate, j - r, tag::VALIDATE)
                };
                let s = source.draw(instance_seed(cfg.seed, stream, trial as u64))?;
                Ok((
                    Record::Gap {
                        n_p,
                        phase,
                        trial,
                        instance_seed: s.instance_seed,
                        solution_cost: s.solution_cost,
                        oracle_value: s.oracle_value,
                        gamma: s.gamma,
                    },
                    None,
                ))
            })?;
            self.timings.phases.insert(format!("np{n_p}_ms"), ms(start.elapsed()));
            let (build, validate) = journal.gaps(offset..offset + r + m);
            let gamma_star = build.iter().copied().fold(0.0, f64::max);
            let covered = validate.iter().filter(|&&g| g <= gamma_star).count() as f64 / validate.len() as f64;
            self.summary.insert(format!("gamma_star_np{n_p}"), gamma_star);
            self.summary.insert(format!("coverage_np{n_p}"), covered);
            if let Some(q) = trials::empirical_quantile(&validate, 1.0 - eps) {
                self.summary.insert(format!("validation_quantile_np{n_p}"), q);
            }
            coverages.push(covered);
        }
        self.summary.insert("r".into(), r as f64);
        self.summary.insert("confidence".into(), confidence_of(eps, r as u64)?);
        self.judge(&coverages);
        Ok(())
    }
}

/// [`FamilyGaps`] that owns its family.
struct OwnedFamilyGaps<F> {
    family: F,
    n_p: usize,
    oracle: OracleConfig,
}

impl<F> OwnedFamilyGaps<F> {
    fn new(family: F, n_p: usize, oracle: OracleConfig) -> Self {
        Self { family, n_p, oracle }
    }
}

impl<F: crate::repetitive::ProblemFamily> GapSource for OwnedFamilyGaps<F> {
    fn draw(&self, instance_seed: u64) -> Result<crate::repetitive::GapSample> {
        FamilyGaps::new(&self.family, self.n_p, self.oracle.clone()).draw(instance_seed)
    }

    fn describe(&self) -> String {
        self.family.description()
    }
}
