//! Partition file formats.
//!
//! JSON, soft form: `{"l": 2, "m": 3, "rows": [[1, 0.5, 0], [0, 0.5, 1]]}`
//! JSON, hard form: `{"labels": [0, 0, 1], "l": 2}`
//! CSV: one line per cluster, comma-separated memberships.
//! Bundle: a JSON list of partitions in either JSON form.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::PartitionMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PartitionFile {
    Soft {
        l: usize,
        m: usize,
        rows: Vec<Vec<f64>>,
    },
    Hard {
        labels: Vec<usize>,
        l: usize,
    },
}

impl PartitionFile {
    pub fn into_matrix(self) -> Result<PartitionMatrix> {
        match self {
            PartitionFile::Soft { l, m, rows } => {
                if rows.len() != l {
                    return Err(Error::Parse(format!("declared l = {l} but found {} rows", rows.len())));
                }
                if let Some(bad) = rows.iter().position(|r| r.len() != m) {
                    return Err(Error::Parse(format!(
                        "declared m = {m} but row {bad} has {} entries",
                        rows[bad].len()
                    )));
                }
                PartitionMatrix::validate(&rows)
            }
            PartitionFile::Hard { labels, l } => PartitionMatrix::from_labels(&labels, l),
        }
    }

    /// Hard matrices are written as labels, soft ones as rows.
    pub fn from_matrix(matrix: &PartitionMatrix) -> Self {
        if matrix.is_hard() {
            PartitionFile::Hard {
                labels: matrix.labels(),
                l: matrix.n_clusters(),
            }
        } else {
            PartitionFile::Soft {
                l: matrix.n_clusters(),
                m: matrix.n_points(),
                rows: matrix.to_rows(),
            }
        }
    }
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn parse_json(text: &str) -> Result<PartitionMatrix> {
    serde_json::from_str::<PartitionFile>(text)
        .map_err(json_error)?
        .into_matrix()
}

pub fn parse_bundle(text: &str) -> Result<Vec<PartitionMatrix>> {
    let files: Vec<PartitionFile> = serde_json::from_str(text).map_err(json_error)?;
    if files.is_empty() {
        return Err(Error::EmptyInput);
    }
    files.into_iter().map(PartitionFile::into_matrix).collect()
}

pub fn parse_csv(text: &str) -> Result<PartitionMatrix> {
    let rows = text
        .lines()
        .map(str::trim)
        .filter(|line| !line.is_empty() && !line.starts_with('#'))
        .enumerate()
        .map(|(k, line)| {
            line.split(',')
                .map(|cell| {
                    cell.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("row {k}: `{}`: {e}", cell.trim())))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    PartitionMatrix::validate(&rows)
}

/// Parses one partition or a bundle, deciding by content.
pub fn parse_any(text: &str) -> Result<Vec<PartitionMatrix>> {
    match text.trim_start().chars().next() {
        Some('[') => parse_bundle(text),
        Some('{') => parse_json(text).map(|m| vec![m]),
        Some(_) => parse_csv(text).map(|m| vec![m]),
        None => Err(Error::EmptyInput),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Reads every partition in a file (a single partition or a bundle).
pub fn read_partitions(path: impl AsRef<Path>) -> Result<Vec<PartitionMatrix>> {
    parse_any(&read_text(path.as_ref())?)
}

/// Reads a file that must contain exactly one partition.
pub fn read_partition(path: impl AsRef<Path>) -> Result<PartitionMatrix> {
    let mut all = read_partitions(path.as_ref())?;
    if all.len() != 1 {
        return Err(Error::Parse(format!(
            "{}: expected one partition, found {}",
            path.as_ref().display(),
            all.len()
        )));
    }
    Ok(all.remove(0))
}

pub fn bundle_to_json<'a>(matrices: impl IntoIterator<Item = &'a PartitionMatrix>) -> String {
    let files: Vec<PartitionFile> = matrices.into_iter().map(PartitionFile::from_matrix).collect();
    serde_json::to_string_pretty(&files).expect("plain data serializes")
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    fs::write(path.as_ref(), text).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))
}
