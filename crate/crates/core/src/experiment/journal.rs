use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;

use super::{ExperimentConfig, GapPhase, Record, TrialRecord};
use crate::error::Result;

const RECORDS: &str = "records.jsonl";
const CONFIG: &str = "config.json";

/// Ordered trial records, mirrored to `records.jsonl` when a directory is set.
pub(super) struct Journal {
    path: Option<PathBuf>,
    records: Vec<Record>,
}

fn config_key(config: &ExperimentConfig) -> Result<serde_json::Value> {
    let mut c = config.clone();
    c.out = None;
    Ok(serde_json::to_value(c)?)
}

impl Journal {
    /// Reloads the complete records of an earlier run with the same config,
    /// dropping a torn last line; any other existing journal is discarded.
    pub(super) fn open(dir: Option<&Path>, config: &ExperimentConfig) -> Result<Self> {
        let Some(dir) = dir else {
            return Ok(Self {
                path: None,
                records: Vec::new(),
            });
        };
        let path = dir.join(RECORDS);
        let key = config_key(config)?;
        let same = fs::read_to_string(dir.join(CONFIG))
            .ok()
            .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok())
            .is_some_and(|v| v == key);
        let mut records = Vec::new();
        if same && path.exists() {
            for line in BufReader::new(File::open(&path)?).lines() {
                match serde_json::from_str::<Record>(&line?) {
                    Ok(r) => records.push(r),
                    Err(_) => break,
                }
            }
            if !records.is_empty() {
                log::info!("resuming after {} recorded entries", records.len());
            }
        } else {
            serde_json::to_writer_pretty(File::create(dir.join(CONFIG))?, &key)?;
        }
        let journal = Self {
            path: Some(path),
            records,
        };
        journal.rewrite()?;
        Ok(journal)
    }

    fn rewrite(&self) -> Result<()> {
        if let Some(path) = &self.path {
            let mut w = BufWriter::new(File::create(path)?);
            for r in &self.records {
                serde_json::to_writer(&mut w, r)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        Ok(())
    }

    pub(super) fn replace(&mut self, records: Vec<Record>) -> Result<()> {
        self.records = records;
        self.rewrite()
    }

    /// Computes entries `len()..end` in parallel chunks, appending each chunk
    /// in index order. Returns the durations reported by newly computed
    /// entries.
    pub(super) fn fill<F>(&mut self, end: usize, f: F) -> Result<Vec<Duration>>
    where
        F: Fn(usize) -> Result<(Record, Option<Duration>)> + Sync,
    {
        let chunk = (4 * rayon::current_num_threads()).max(16);
        let mut durations = Vec::new();
        let mut file = match &self.path {
            Some(p) => Some(BufWriter::new(OpenOptions::new().append(true).open(p)?)),
            None => None,
        };
        while self.records.len() < end {
            let lo = self.records.len();
            let hi = (lo + chunk).min(end);
            let results: Vec<Result<(Record, Option<Duration>)>> = (lo..hi).into_par_iter().map(&f).collect();
            let mut failure = None;
            for res in results {
                match res {
                    Ok((record, d)) => {
                        if let Some(w) = file.as_mut() {
                            serde_json::to_writer(&mut *w, &record)?;
                            w.write_all(b"\n")?;
                        }
                        self.records.push(record);
                        durations.extend(d);
                    }
                    Err(e) => {
                        failure = Some(e);
                        break;
                    }
                }
            }
            if let Some(w) = file.as_mut() {
                w.flush()?;
            }
            if let Some(e) = failure {
                log::error!("entry {} failed; {} entries are saved", self.records.len(), self.records.len());
                return Err(e);
            }
        }
        Ok(durations)
    }

    pub(super) fn trials(&self, range: Range<usize>) -> Vec<TrialRecord> {
        self.records[range]
            .iter()
            .filter_map(|r| match r {
                Record::Trial(t) => Some(t.clone()),
                _ => None,
            })
            .collect()
    }

    /// Gammas of the build and validation phases in `range`.
    pub(super) fn gaps(&self, range: Range<usize>) -> (Vec<f64>, Vec<f64>) {
        let mut build = Vec::new();
        let mut validate = Vec::new();
        for r in &self.records[range] {
            if let Record::Gap { phase, gamma, .. } = r {
                match phase {
                    GapPhase::Build => build.push(*gamma),
                    GapPhase::Validate => validate.push(*gamma),
                }
            }
        }
        (build, validate)
    }

    pub(super) fn into_records(self) -> Vec<Record> {
        self.records
    }
}
