use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpc::WaypointParams;
use crate::oracle::OracleConfig;
use crate::percentile::Sampling;
use crate::problems::Benchmark;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Solve,
    Certify,
    ChiSweep,
    Table1,
    TspFig2,
    MpcFig4,
    Validate,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Solve,
        ExperimentKind::Certify,
        ExperimentKind::ChiSweep,
        ExperimentKind::Table1,
        ExperimentKind::TspFig2,
        ExperimentKind::MpcFig4,
        ExperimentKind::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Solve => "solve",
            ExperimentKind::Certify => "certify",
            ExperimentKind::ChiSweep => "chi-sweep",
            ExperimentKind::Table1 => "table1",
            ExperimentKind::TspFig2 => "tsp-fig2",
            ExperimentKind::MpcFig4 => "mpc-fig4",
            ExperimentKind::Validate => "validate",
        }
    }

    /// Pass mark used by `--check` when the config gives none.
    pub fn default_threshold(self) -> Option<f64> {
        match self {
            ExperimentKind::Solve | ExperimentKind::ChiSweep => None,
            ExperimentKind::Certify | ExperimentKind::Table1 => Some(0.95),
            ExperimentKind::TspFig2 => Some(0.98),
            ExperimentKind::MpcFig4 | ExperimentKind::Validate => Some(0.985),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config("experiment", format!("unknown experiment '{s}'")))
    }
}

/// A single problem to solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemConfig {
    Benchmark {
        name: Benchmark,
    },
    /// Random waypoints in `[lo, hi]`, drawn from the run seed, or the
    /// explicit list when given.
    Tsp {
        #[serde(default)]
        waypoints: Option<usize>,
        #[serde(default)]
        points: Option<Vec<[f64; 2]>>,
        #[serde(default = "unit_lo")]
        lo: [f64; 2],
        #[serde(default = "unit_hi")]
        hi: [f64; 2],
    },
}

/// A family of problems for the repetitive bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyConfig {
    Mpc {
        #[serde(default)]
        params: WaypointParams,
    },
    Tsp {
        waypoints: usize,
        #[serde(default = "unit_lo")]
        lo: [f64; 2],
        #[serde(default = "unit_hi")]
        hi: [f64; 2],
    },
    /// Synthetic gaps, uniform on `[lo, hi]`.
    Uniform {
        #[serde(default)]
        lo: f64,
        #[serde(default = "one")]
        hi: f64,
    },
}

fn unit_lo() -> [f64; 2] {
    [0.0, 0.0]
}

fn unit_hi() -> [f64; 2] {
    [1.0, 1.0]
}

fn one() -> f64 {
    1.0
}

/// One experiment run. Fields not used by the chosen experiment are ignored
/// after validation; unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmarks: Option<Vec<Benchmark>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_p_values: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_v: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<Sampling>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// A config with only the experiment and seed set.
    pub fn new(experiment: ExperimentKind, seed: u64) -> Self {
        Self {
            experiment,
            seed,
            problem: None,
            family: None,
            benchmarks: None,
            n_p: None,
            n_p_values: None,
            n_v: None,
            r: None,
            epsilon: None,
            confidence: None,
            chi: None,
            chi_values: None,
            radii: None,
            trials: None,
            validation: None,
            sampling: None,
            oracle: None,
            threshold: None,
            out: None,
        }
    }

    /// Parses a JSON config. `experiment` and `seed`, when given, fill in or
    /// override the file's values; a file naming a different experiment is
    /// an error.
    pub fn from_json(text: &str, experiment: Option<ExperimentKind>, seed: Option<u64>) -> Result<Self> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::config("<file>", e.to_string()))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::config("<file>", "the config must be a JSON object"))?;
        if let Some(kind) = experiment {
            match obj.get("experiment").and_then(|v| v.as_str()) {
                Some(named) if named != kind.name() => {
                    return Err(Error::config(
                        "experiment",
                        format!("the file is for '{named}' but '{kind}' was requested"),
                    ));
                }
                _ => {
                    obj.insert("experiment".into(), kind.name().into());
                }
            }
        }
        if let Some(s) = seed {
            obj.insert("seed".into(), s.into());
        }
        if !obj.contains_key("seed") {
            return Err(Error::config("seed", "a seed is required (in the file or via --seed)"));
        }
        let cfg: ExperimentConfig = serde_json::from_value(value).map_err(|e| Error::config("<file>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn chi_or_default(&self) -> f64 {
        self.chi.unwrap_or(crate::certify::DEFAULT_CHI)
    }

    pub fn epsilon_or_default(&self) -> f64 {
        self.epsilon.unwrap_or(crate::certify::DEFAULT_EPSILON)
    }

    pub fn trials_or(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    pub fn threshold_or_default(&self) -> Option<f64> {
        self.threshold.or(self.experiment.default_threshold())
    }

    /// Field-level checks for the chosen experiment.
    pub fn validate(&self) -> Result<()> {
        use ExperimentKind::*;
        let need = |present: bool, field: &str| {
            if present {
                Ok(())
            } else {
                Err(Error::config(field, format!("required for experiment '{}'", self.experiment)))
            }
        };
        match self.experiment {
            Solve => {
                need(self.problem.is_some(), "problem")?;
                need(self.n_p.is_some(), "n_p")?;
            }
            Certify => {
                need(self.problem.is_some(), "problem")?;
                need(self.n_p.is_some(), "n_p")?;
                need(self.n_v.is_some(), "n_v")?;
            }
            ChiSweep => {
                need(self.problem.is_some(), "problem")?;
                need(self.n_p.is_some(), "n_p")?;
                need(self.chi_values.is_some(), "chi_values")?;
            }
            Table1 => {
                need(self.n_p.is_some(), "n_p")?;
                need(self.n_v.is_some(), "n_v")?;
                need(self.trials.is_some(), "trials")?;
            }
            TspFig2 => {
                need(matches!(self.problem, Some(ProblemConfig::Tsp { .. })), "problem")?;
                need(self.n_p.is_some(), "n_p")?;
                need(self.confidence.is_some(), "confidence")?;
                need(self.trials.is_some(), "trials")?;
            }
            MpcFig4 => {
                need(self.n_p_values.is_some(), "n_p_values")?;
                need(self.validation.is_some(), "validation")?;
                need(self.r.is_some() || self.confidence.is_some(), "r")?;
            }
            Validate => {
                need(self.family.is_some(), "family")?;
                need(self.n_p.is_some(), "n_p")?;
                need(self.validation.is_some(), "validation")?;
                need(self.r.is_some() || self.confidence.is_some(), "r")?;
            }
        }
        self.check_ranges()
    }

    fn check_ranges(&self) -> Result<()> {
        let positive = |v: Option<usize>, field: &str| match v {
            Some(0) => Err(Error::config(field, "must be at least 1")),
            _ => Ok(()),
        };
        positive(self.n_p, "n_p")?;
        positive(self.trials, "trials")?;
        positive(self.validation, "validation")?;
        if self.n_v == Some(0) {
            return Err(Error::config("n_v", "must be at least 1"));
        }
        if self.r == Some(0) {
            return Err(Error::config("r", "must be at least 1"));
        }
        if let Some(v) = &self.n_p_values {
            if v.is_empty() || v.contains(&0) {
                return Err(Error::config("n_p_values", "must be a nonempty list of positive counts"));
            }
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::config("epsilon", format!("{e} outside (0, 1]")));
            }
        }
        if let Some(c) = self.confidence {
            if !(0.0..1.0).contains(&c) {
                return Err(Error::config("confidence", format!("{c} outside [0, 1)")));
            }
        }
        let chi_ok = |c: f64| c > 0.0 && c <= 1.0;
        if let Some(c) = self.chi {
            if !chi_ok(c) {
                return Err(Error::config("chi", format!("{c} outside (0, 1]")));
            }
        }
        if let Some(v) = &self.chi_values {
            if v.is_empty() || !v.iter().all(|&c| chi_ok(c)) {
                return Err(Error::config("chi_values", "must be a nonempty list of values in (0, 1]"));
            }
        }
        if let Some(v) = &self.radii {
            if !v.iter().all(|&r| r >= 0.0) {
                return Err(Error::config("radii", "radii must be >= 0"));
            }
        }
        if let Some(t) = self.threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::config("threshold", format!("{t} outside [0, 1]")));
            }
        }
        if let Some(ProblemConfig::Tsp { waypoints, points, .. }) = &self.problem {
            match (waypoints, points) {
                (None, None) => return Err(Error::config("problem.waypoints", "give a waypoint count or points")),
                (Some(n), _) if *n < 2 => return Err(Error::config("problem.waypoints", "need at least 2")),
                _ => {}
            }
        }
        if let Some(FamilyConfig::Uniform { lo, hi }) = &self.family {
            if !(lo < hi) {
                return Err(Error::config("family", format!("uniform gaps need lo < hi, got [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(e: Error) -> String {
        match e {
            Error::Config { field, .. } => field,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn parses_and_overrides() {
        let text = r#"{"problem": {"type": "benchmark", "name": "rastrigrin2"}, "n_p": 1, "seed": 4}"#;
        let cfg = ExperimentConfig::from_json(text, Some(ExperimentKind::Solve), Some(9)).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.experiment, ExperimentKind::Solve);
        assert_eq!(
            cfg.problem,
            Some(ProblemConfig::Benchmark {
                name: Benchmark::Rastrigin2
            })
        );
    }

    #[test]
    fn seed_is_mandatory() {
        let text = r#"{"problem": {"type": "benchmark", "name": "beale"}, "n_p": 5}"#;
        let e = ExperimentConfig::from_json(text, Some(ExperimentKind::Solve), None).unwrap_err();
        assert_eq!(field_of(e), "seed");
    }

    #[test]
    fn field_level_errors() {
        let e = ExperimentConfig::from_json(r#"{"seed": 1}"#, Some(ExperimentKind::Solve), None).unwrap_err();
        assert_eq!(field_of(e), "problem");

        let text = r#"{"seed": 1, "n_p": 10, "n_v": 5, "trials": 3, "chi": 1.5}"#;
        let e = ExperimentConfig::from_json(text, Some(ExperimentKind::Table1), None).unwrap_err();
        assert_eq!(field_of(e), "chi");

        let text = r#"{"experiment": "table1", "seed": 1}"#;
        let e = ExperimentConfig::from_json(text, Some(ExperimentKind::Solve), None).unwrap_err();
        assert_eq!(field_of(e), "experiment");

        let text = r#"{"seed": 1, "n_pp": 3}"#;
        let e = ExperimentConfig::from_json(text, Some(ExperimentKind::Solve), None).unwrap_err();
        assert_eq!(field_of(e), "<file>");
    }

    #[test]
    fn kinds_round_trip_through_names() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
        assert!("fig9".parse::<ExperimentKind>().is_err());
    }
}
