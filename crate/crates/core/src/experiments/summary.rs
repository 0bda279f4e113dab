//! Run summaries and CSV read-back.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::EVAL_COLUMNS;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedMetric {
    pub seed: u64,
    pub value: f64,
}

/// Per-seed values with their cross-seed mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub per_seed: Vec<SeedMetric>,
    pub mean: f64,
    pub std: f64,
    /// Half the standard deviation, the usual shaded band around a learning curve.
    pub half_std: f64,
}

impl Aggregate {
    pub fn from_values(per_seed: Vec<SeedMetric>) -> Self {
        let n = per_seed.len().max(1) as f64;
        let mean = per_seed.iter().map(|m| m.value).sum::<f64>() / n;
        let var = per_seed.iter().map(|m| (m.value - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        Self {
            per_seed,
            mean,
            std,
            half_std: 0.5 * std,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub recipe: String,
    pub config_hash: String,
    /// What the per-seed values measure.
    pub metric: String,
    pub aggregate: Aggregate,
    pub wall_clock_secs: f64,
    pub details: serde_json::Value,
}

impl RunSummary {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

/// A CSV file with a header row and unquoted fields.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::Format(format!("{}: empty file", path.display())))?
            .split(',')
            .map(str::to_string)
            .collect();
        let rows = lines
            .filter(|l| !l.is_empty())
            .map(|l| l.split(',').map(str::to_string).collect::<Vec<_>>())
            .collect::<Vec<_>>();
        if let Some(bad) = rows.iter().position(|r| r.len() != header.len()) {
            return Err(Error::Format(format!(
                "{}: row {} has {} fields, header has {}",
                path.display(),
                bad + 1,
                rows[bad].len(),
                header.len()
            )));
        }
        Ok(Self { header, rows })
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("missing column {name:?}")))
    }

    pub fn floats(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.column_index(name)?;
        self.rows
            .iter()
            .map(|r| {
                r[i].parse::<f64>()
                    .map_err(|_| Error::Format(format!("column {name:?}: cannot parse {:?}", r[i])))
            })
            .collect()
    }
}

/// Final score per seed (mean of the last `window` evaluation means) from evaluation CSVs,
/// aggregated across seeds.
pub fn summarize(logs: &[(u64, PathBuf)], window: usize) -> Result<Aggregate> {
    let mut per_seed = Vec::with_capacity(logs.len());
    for (seed, path) in logs {
        let table = CsvTable::read(path)?;
        for (i, expected) in EVAL_COLUMNS.iter().enumerate() {
            if table.header.get(i).map(String::as_str) != Some(expected) {
                return Err(Error::Format(format!(
                    "{}: expected column {expected:?} at position {i}",
                    path.display()
                )));
            }
        }
        let means = table.floats("mean_return")?;
        if means.is_empty() {
            return Err(Error::Format(format!("{}: no evaluation rows", path.display())));
        }
        let tail = &means[means.len().saturating_sub(window)..];
        per_seed.push(SeedMetric {
            seed: *seed,
            value: tail.iter().sum::<f64>() / tail.len() as f64,
        });
    }
    Ok(Aggregate::from_values(per_seed))
}
