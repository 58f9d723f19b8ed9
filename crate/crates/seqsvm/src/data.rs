// SPDX-License-Identifier: Apache-2.0

//! CSV ingestion and the registry of known datasets.

use std::collections::HashMap;
use std::env;
use std::path::{Path, PathBuf};

use seqsvm_core::Dataset;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Overrides the directory the registry looks in for dataset files.
pub const DATA_DIR_ENV: &str = "SEQSVM_DATA_DIR";

/// Column layout of a CSV file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvSchema {
    /// Label column index; `None` means the last column.
    pub label_column: Option<usize>,
    /// Whether the first line is a header to skip.
    pub header: bool,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema { label_column: None, header: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedCsv {
    pub dataset: Dataset,
    /// Original label text for each class index.
    pub labels: Vec<String>,
}

/// Distinct labels in sorted order: numerically when every label is a number,
/// otherwise lexicographically.
pub fn sorted_labels(raw: &[String]) -> Vec<String> {
    let mut labels: Vec<String> = raw.to_vec();
    labels.sort();
    labels.dedup();
    let numeric: Option<Vec<f64>> = labels.iter().map(|l| l.parse::<f64>().ok()).collect();
    if let Some(values) = numeric {
        let mut pairs: Vec<(f64, String)> = values.into_iter().zip(labels).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        labels = pairs.into_iter().map(|(_, l)| l).collect();
    }
    labels
}

pub fn load_csv(path: &Path, name: &str, schema: &CsvSchema) -> Result<LoadedCsv> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(schema.header)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, 0, e))?;
    let parse_err = |row: usize, msg: String| Error::Parse { path: path.to_path_buf(), row, msg };
    let first_row = if schema.header { 2 } else { 1 };
    let mut width = None;
    let mut rows = Vec::new();
    let mut raw_labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = first_row + i;
        let record = record.map_err(|e| csv_error(path, row, e))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(parse_err(row, format!("expected {w} columns, found {}", record.len())));
        }
        if w < 2 {
            return Err(parse_err(row, "need at least one feature and a label".into()));
        }
        let label_col = schema.label_column.unwrap_or(w - 1);
        if label_col >= w {
            return Err(parse_err(row, format!("label column {label_col} out of range")));
        }
        let mut features = Vec::with_capacity(w - 1);
        for (c, cell) in record.iter().enumerate() {
            if c == label_col {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| parse_err(row, format!("column {c}: '{cell}' is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(row, format!("column {c}: '{cell}' is not finite")));
            }
            features.push(v);
        }
        rows.push(features);
        raw_labels.push(record[label_col].to_string());
    }
    if rows.is_empty() {
        return Err(parse_err(first_row, "no data rows".into()));
    }
    let labels = sorted_labels(&raw_labels);
    if labels.len() < 2 {
        return Err(Error::Invalid(format!("{}: fewer than two classes", path.display())));
    }
    let lookup: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let index: Vec<usize> = raw_labels.iter().map(|l| lookup[l.as_str()]).collect();
    let dataset = Dataset::from_rows(name, labels.len(), rows, index)?;
    Ok(LoadedCsv { dataset, labels })
}

fn csv_error(path: &Path, row: usize, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io { path: path.to_path_buf(), source },
        kind => Error::Parse { path: path.to_path_buf(), row, msg: format!("{kind:?}") },
    }
}

/// One of the evaluation datasets: where its file lives and its expected shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetSpec {
    pub key: &'static str,
    pub display: &'static str,
    pub file: &'static str,
    pub m: usize,
    pub n: usize,
    /// Regularization used by the registry's default config for this dataset.
    pub lambda: f64,
}

pub const REGISTRY: [DatasetSpec; 5] = [
    DatasetSpec { key: "cardio", display: "Cardio", file: "cardio.csv", m: 21, n: 3, lambda: 1e-3 },
    DatasetSpec { key: "dermatology", display: "Derm.", file: "dermatology.csv", m: 34, n: 6, lambda: 1e-3 },
    DatasetSpec { key: "pendigits", display: "PD", file: "pendigits.csv", m: 16, n: 10, lambda: 1e-4 },
    DatasetSpec { key: "redwine", display: "RW", file: "redwine.csv", m: 11, n: 6, lambda: 1e-4 },
    DatasetSpec { key: "whitewine", display: "WW", file: "whitewine.csv", m: 11, n: 7, lambda: 1e-3 },
];

pub fn spec(key: &str) -> Option<&'static DatasetSpec> {
    REGISTRY.iter().find(|s| s.key == key)
}

/// Directory holding the dataset files: `$SEQSVM_DATA_DIR`, else `data`.
pub fn data_dir() -> PathBuf {
    env::var_os(DATA_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("data"))
}

impl DatasetSpec {
    pub fn path_in(&self, dir: &Path) -> PathBuf {
        dir.join(self.file)
    }

    /// Loads the file from `dir` and checks it has the registered shape.
    pub fn load_from(&self, dir: &Path) -> Result<LoadedCsv> {
        let path = self.path_in(dir);
        let loaded = load_csv(&path, self.key, &CsvSchema::default())?;
        let (m, n) = (loaded.dataset.m(), loaded.dataset.n());
        if (m, n) != (self.m, self.n) {
            return Err(Error::Invalid(format!(
                "{}: expected {} features and {} classes, found {m} and {n}",
                path.display(),
                self.m,
                self.n
            )));
        }
        Ok(loaded)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn csv_file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn small_file() {
        let f = csv_file("a,b,y\n1,2,b\n3,4,a\n5,6,b\n");
        let got = load_csv(f.path(), "t", &CsvSchema::default()).unwrap();
        assert_eq!((got.dataset.m(), got.dataset.n()), (2, 2));
        assert_eq!(got.labels, vec!["a", "b"]);
        assert_eq!(got.dataset.samples()[1].label, 0);
    }

    #[test]
    fn numeric_labels_sort_by_value() {
        let f = csv_file("1,10\n2,9\n3,3\n");
        let schema = CsvSchema { header: false, ..Default::default() };
        let got = load_csv(f.path(), "t", &schema).unwrap();
        assert_eq!(got.labels, vec!["3", "9", "10"]);
        let labels: Vec<usize> = got.dataset.samples().iter().map(|s| s.label).collect();
        assert_eq!(labels, vec![2, 1, 0]);
    }

    #[test]
    fn label_column_in_front() {
        let f = csv_file("y,a\nx,1\nz,2\n");
        let schema = CsvSchema { label_column: Some(0), header: true };
        let got = load_csv(f.path(), "t", &schema).unwrap();
        assert_eq!(got.dataset.samples()[1].features, vec![2.0]);
        assert_eq!(got.dataset.samples()[1].label, 1);
    }

    #[test]
    fn bad_rows_name_the_row() {
        let f = csv_file("a,y\n1,p\nx,q\n");
        match load_csv(f.path(), "t", &CsvSchema::default()) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
        let f = csv_file("a,y\n1,p\n1,2,q\n");
        match load_csv(f.path(), "t", &CsvSchema::default()) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn one_class_is_rejected() {
        let f = csv_file("a,y\n1,p\n2,p\n");
        assert!(load_csv(f.path(), "t", &CsvSchema::default()).is_err());
    }
}
