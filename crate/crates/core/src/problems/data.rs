//! Tabular dataset ingestion (CSV and svmlight).

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::DenseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    /// Comma-separated numbers, label in the last column, optional header.
    Csv,
    /// `label idx:val …` with 1-based feature indices.
    Svmlight,
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(DatasetFormat::Csv),
            "svmlight" => Ok(DatasetFormat::Svmlight),
            other => Err(Error::config("format", format!("unknown dataset format `{other}`"))),
        }
    }
}

/// Datasets with a known shape (`samples × features`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnownDataset {
    Wine,
    ColonCancer,
    Leukemia,
}

impl KnownDataset {
    pub fn shape(self) -> (usize, usize) {
        match self {
            KnownDataset::Wine => (6497, 11),
            KnownDataset::ColonCancer => (62, 2000),
            KnownDataset::Leukemia => (38, 7129),
        }
    }

    /// Regularization weight used with this dataset by default.
    pub fn default_lambda(self) -> f64 {
        match self {
            KnownDataset::Wine => 3.0,
            KnownDataset::ColonCancer => 2.0,
            KnownDataset::Leukemia => 4.0,
        }
    }
}

/// Feature matrix (row-major) and labels.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularData {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    pub labels: Vec<f64>,
}

impl TabularData {
    pub fn matrix(&self) -> Result<DenseMatrix> {
        DenseMatrix::from_row_major(self.rows, self.cols, self.values.clone())
    }
}

pub fn load_tabular_dataset(path: &Path, format: DatasetFormat, known: Option<KnownDataset>) -> Result<TabularData> {
    let file = File::open(path).map_err(|e| Error::ingestion(path.display().to_string(), e.to_string()))?;
    let data = match format {
        DatasetFormat::Csv => parse_csv(BufReader::new(file), path)?,
        DatasetFormat::Svmlight => parse_svmlight(BufReader::new(file), path, known.map(|k| k.shape().1))?,
    };
    if data.rows == 0 {
        return Err(Error::ingestion(path.display().to_string(), "no data rows"));
    }
    if let Some(k) = known {
        let (m, n) = k.shape();
        if data.rows != m {
            return Err(Error::ingestion(
                format!("{}: row {}", path.display(), data.rows.min(m) + 1),
                format!("{k:?} expects {m} rows, found {}", data.rows),
            ));
        }
        if data.cols != n {
            return Err(Error::ingestion(
                format!("{}: column {}", path.display(), data.cols.min(n) + 1),
                format!("{k:?} expects {n} feature columns, found {}", data.cols),
            ));
        }
    }
    Ok(data)
}

fn parse_csv<R: BufRead>(reader: R, path: &Path) -> Result<TabularData> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0;
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let at = |col: usize| format!("{}: row {}, column {}", path.display(), line + 1, col + 1);
        let parsed: std::result::Result<Vec<f64>, usize> =
            record.iter().enumerate().map(|(c, s)| s.parse::<f64>().map_err(|_| c)).collect();
        let nums = match parsed {
            Ok(v) => v,
            // A non-numeric first line is a header.
            Err(_) if line == 0 => continue,
            Err(c) => {
                return Err(Error::ingestion(at(c), format!("cannot parse `{}` as a number", &record[c])));
            }
        };
        if nums.len() < 2 {
            return Err(Error::ingestion(at(0), "need at least one feature and a label"));
        }
        match width {
            None => width = Some(nums.len()),
            Some(w) if w != nums.len() => {
                return Err(Error::ingestion(
                    at(nums.len().min(w)),
                    format!("expected {w} fields, found {}", nums.len()),
                ));
            }
            _ => {}
        }
        let (feat, label) = nums.split_at(nums.len() - 1);
        values.extend_from_slice(feat);
        labels.push(label[0]);
        rows += 1;
    }
    Ok(TabularData { rows, cols: width.map_or(0, |w| w - 1), values, labels })
}

fn parse_svmlight<R: BufRead>(reader: R, path: &Path, declared_cols: Option<usize>) -> Result<TabularData> {
    let mut entries: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut max_col = 0;
    for (line, text) in reader.lines().enumerate() {
        let text = text?;
        let content = text.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let label = label_tok.parse::<f64>().map_err(|_| {
            Error::ingestion(format!("{}: row {}", path.display(), line + 1), format!("bad label `{label_tok}`"))
        })?;
        let mut row = Vec::new();
        for tok in tokens {
            let bad =
                || Error::ingestion(format!("{}: row {}", path.display(), line + 1), format!("bad entry `{tok}`"));
            let (i, v) = tok.split_once(':').ok_or_else(bad)?;
            let i: usize = i.parse().map_err(|_| bad())?;
            let v: f64 = v.parse().map_err(|_| bad())?;
            if i == 0 {
                return Err(Error::ingestion(
                    format!("{}: row {}, column 0", path.display(), line + 1),
                    "feature indices are 1-based",
                ));
            }
            max_col = max_col.max(i);
            row.push((i - 1, v));
        }
        entries.push(row);
        labels.push(label);
    }
    let cols = declared_cols.unwrap_or(max_col).max(max_col);
    let rows = entries.len();
    let mut values = vec![0.0; rows * cols];
    for (r, row) in entries.iter().enumerate() {
        for &(c, v) in row {
            values[r * cols + c] = v;
        }
    }
    Ok(TabularData { rows, cols, values, labels })
}
