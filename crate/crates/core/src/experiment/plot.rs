use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::trials::empirical_quantile;
use super::{ExperimentKind, GapPhase, Record, RunReport};
use crate::error::{Error, Result};

const HIST_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Certified bound against the true gap, one row per trial.
    Fig2,
    /// Gap histograms with the certified bound and the empirical cutoff.
    Fig4,
}

/// Writes plot-ready CSV files for `report` into `dir` and returns their paths.
pub fn emit_plot_data(report: &RunReport, kind: PlotKind, dir: &Path) -> Result<Vec<PathBuf>> {
    use ExperimentKind::*;
    let exp = report.config.experiment;
    let fits = match kind {
        PlotKind::Fig2 => matches!(exp, Certify | Table1 | TspFig2),
        PlotKind::Fig4 => matches!(exp, MpcFig4 | Validate),
    };
    if !fits {
        return Err(Error::config("kind", format!("{kind:?} data cannot come from a '{exp}' report")));
    }
    match kind {
        PlotKind::Fig2 => fig2(report, dir),
        PlotKind::Fig4 => fig4(report, dir),
    }
}

fn fig2(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut groups: BTreeMap<&str, Vec<(usize, f64, f64)>> = BTreeMap::new();
    for t in report.trial_records() {
        groups.entry(&t.group).or_default().push((t.trial, t.v_star, t.true_gap));
    }
    let single = groups.len() <= 1;
    if groups.is_empty() {
        groups.insert("", Vec::new());
    }
    let mut paths = Vec::new();
    for (group, rows) in groups {
        let path = if single {
            dir.join("fig2.csv")
        } else {
            dir.join(format!("fig2_{group}.csv"))
        };
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["trial", "v_star", "true_gap"])?;
        for (trial, v, g) in rows {
            w.write_record([trial.to_string(), v.to_string(), g.to_string()])?;
        }
        w.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

fn fig4(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut by_np: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in &report.records {
        if let Record::Gap { n_p, phase, gamma, .. } = r {
            let e = by_np.entry(*n_p).or_default();
            match phase {
                GapPhase::Build => e.0.push(*gamma),
                GapPhase::Validate => e.1.push(*gamma),
            }
        }
    }
    let eps = report.config.epsilon_or_default();
    let hist_path = dir.join("fig4_hist.csv");
    let marker_path = dir.join("fig4_marker.csv");
    let mut hist = csv::Writer::from_path(&hist_path)?;
    let mut marker = csv::Writer::from_path(&marker_path)?;
    hist.write_record(["n_p", "bin_lo", "bin_hi", "count"])?;
    marker.write_record(["n_p", "gamma_star", "cutoff"])?;
    for (n_p, (build, validate)) in by_np {
        let gamma_star = build.iter().copied().fold(0.0, f64::max);
        let shown = if validate.is_empty() { &build } else { &validate };
        let cutoff = empirical_quantile(shown, 1.0 - eps).unwrap_or(f64::NAN);
        marker.write_record([n_p.to_string(), gamma_star.to_string(), cutoff.to_string()])?;
        let top = shown.iter().copied().fold(gamma_star, f64::max);
        if top <= 0.0 {
            hist.write_record([n_p.to_string(), "0".into(), "0".into(), shown.len().to_string()])?;
            continue;
        }
        let width = top / HIST_BINS as f64;
        let mut counts = [0usize; HIST_BINS];
        for &g in shown {
            counts[((g / width) as usize).min(HIST_BINS - 1)] += 1;
        }
        for (b, c) in counts.iter().enumerate() {
            hist.write_record([
                n_p.to_string(),
                (b as f64 * width).to_string(),
                ((b + 1) as f64 * width).to_string(),
                c.to_string(),
            ])?;
        }
    }
    hist.flush()?;
    marker.flush()?;
    Ok(vec![hist_path, marker_path])
}
