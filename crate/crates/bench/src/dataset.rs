//! Rating CSV ingestion with mean scaling.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::Environment;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: csv::Error },
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("line {line}: {reason}")]
    BadValue { line: u64, reason: String },
    #[error("need at least 2 distinct arm labels, found {0}")]
    TooFewArms(usize),
    #[error("scale factor must be finite, got {0}")]
    BadScale(f64),
}

/// Where to find the dataset and how to transform it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub path: PathBuf,
    #[serde(default = "default_arm_column")]
    pub arm_column: String,
    #[serde(default = "default_value_column")]
    pub value_column: String,
    #[serde(default = "default_scale")]
    pub scale_factor: f64,
}

fn default_arm_column() -> String {
    "genre".into()
}

fn default_value_column() -> String {
    "rating".into()
}

fn default_scale() -> f64 {
    1.0
}

/// Per-arm pools after the shift, plus what was done to them.
#[derive(Debug, Clone)]
pub struct Ingested {
    /// Arm labels in lexicographic order; arm `m` is `labels[m]`.
    pub labels: Vec<String>,
    pub pools: Vec<Vec<f64>>,
    pub raw_means: Vec<f64>,
    pub scaled_means: Vec<f64>,
}

impl Ingested {
    pub fn counts(&self) -> Vec<usize> {
        self.pools.iter().map(Vec::len).collect()
    }

    pub fn environment(&self) -> Environment {
        Environment::empirical(self.pools.clone())
    }
}

/// Groups `value_column` by `arm_column` and shifts every pool by
/// `(scale_factor - 1) * mean`, which scales the pool mean and keeps its variance.
pub fn ingest_ratings_csv(path: &Path, arm_column: &str, value_column: &str, scale_factor: f64) -> Result<Ingested, DatasetError> {
    if !scale_factor.is_finite() {
        return Err(DatasetError::BadScale(scale_factor));
    }
    let read_err = |source| DatasetError::Read { path: path.to_path_buf(), source };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(read_err)?;
    let headers = reader.headers().map_err(read_err)?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| DatasetError::MissingColumn(name.into()));
    let (arm_idx, value_idx) = (column(arm_column)?, column(value_column)?);
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(read_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).ok_or_else(|| DatasetError::BadValue { line, reason: "missing field".into() });
        let label = field(arm_idx)?;
        let raw = field(value_idx)?;
        let value: f64 = raw.parse().map_err(|_| DatasetError::BadValue { line, reason: format!("not a number: {raw:?}") })?;
        if !value.is_finite() {
            return Err(DatasetError::BadValue { line, reason: format!("non-finite value {raw:?}") });
        }
        groups.entry(label.to_string()).or_default().push(value);
    }
    if groups.len() < 2 {
        return Err(DatasetError::TooFewArms(groups.len()));
    }
    let mut out = Ingested { labels: Vec::new(), pools: Vec::new(), raw_means: Vec::new(), scaled_means: Vec::new() };
    for (label, mut pool) in groups {
        let mean = pool.iter().sum::<f64>() / pool.len() as f64;
        let shift = (scale_factor - 1.0) * mean;
        pool.iter_mut().for_each(|v| *v += shift);
        out.labels.push(label);
        out.raw_means.push(mean);
        out.scaled_means.push(pool.iter().sum::<f64>() / pool.len() as f64);
        out.pools.push(pool);
    }
    Ok(out)
}
