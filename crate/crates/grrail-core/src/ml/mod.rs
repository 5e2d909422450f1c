//! Feature selection, random-forest classification, cross-validation, and
//! the statistical tests used for reporting.

mod eval;
mod forest;
mod select;
mod stats;

pub use eval::{cross_validate, permutation_importance, EvalConfig, EvalReport, SubjectDecision, PERMUTATION_REPEATS};
pub use forest::{train_forest, FeaturesPerSplit, ForestModel, ForestParams};
pub use select::{select_features, SelectionResult};
pub use stats::{auc, mann_whitney_u, normal_cdf, two_proportion_z, ZTestResult};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl std::str::FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::Table(format!("unknown split tag '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CohortRow {
    pub id: String,
    pub features: Vec<f64>,
    pub label: u8,
    pub split: Split,
}

/// Subjects with descriptor vectors, binary labels, and split tags.
#[derive(Debug, Clone)]
pub struct CohortTable {
    pub feature_names: Vec<String>,
    pub rows: Vec<CohortRow>,
}

impl CohortTable {
    pub fn new(feature_names: Vec<String>, rows: Vec<CohortRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Table("cohort has no rows".into()));
        }
        let d = feature_names.len();
        for row in &rows {
            if row.features.len() != d {
                return Err(Error::Table(format!(
                    "row '{}' has {} features, expected {d}",
                    row.id,
                    row.features.len()
                )));
            }
            if row.label > 1 {
                return Err(Error::Table(format!("row '{}' label must be 0 or 1", row.id)));
            }
        }
        let train_classes: std::collections::BTreeSet<u8> = rows
            .iter()
            .filter(|r| r.split == Split::Train)
            .map(|r| r.label)
            .collect();
        if train_classes.len() < 2 {
            return Err(Error::Table("train split must contain both classes".into()));
        }
        Ok(CohortTable { feature_names, rows })
    }

    pub fn rows_with_split(&self, split: Split) -> Vec<usize> {
        (0..self.rows.len()).filter(|&i| self.rows[i].split == split).collect()
    }

    /// Joins a descriptor CSV (subject id + named features) with a manifest
    /// supplying `label` and `split` per subject id.
    pub fn from_feature_csv(
        features_path: &Path,
        labels: &std::collections::BTreeMap<String, (u8, Split)>,
    ) -> Result<Self> {
        let mut reader = csv::Reader::from_path(features_path).map_err(csv_err)?;
        let headers = reader.headers().map_err(csv_err)?.clone();
        if headers.is_empty() || headers.get(0) != Some("subject_id") {
            return Err(Error::Table("first feature CSV column must be 'subject_id'".into()));
        }
        let feature_names: Vec<String> = headers.iter().skip(1).map(String::from).collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(csv_err)?;
            let id = record
                .get(0)
                .ok_or_else(|| Error::Table("missing subject id".into()))?
                .to_string();
            let features: Vec<f64> = record
                .iter()
                .skip(1)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::Table(format!("bad feature value '{v}' for '{id}'")))
                })
                .collect::<Result<_>>()?;
            let &(label, split) = labels
                .get(&id)
                .ok_or_else(|| Error::Table(format!("subject '{id}' missing from manifest")))?;
            rows.push(CohortRow { id, features, label, split });
        }
        CohortTable::new(feature_names, rows)
    }

    /// Writes the descriptor CSV shape: `subject_id` then named features.
    pub fn write_feature_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(out, "subject_id")?;
        for name in &self.feature_names {
            write!(out, ",{name}")?;
        }
        writeln!(out)?;
        for row in &self.rows {
            write!(out, "{}", row.id)?;
            for v in &row.features {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Table(e.to_string())
}
