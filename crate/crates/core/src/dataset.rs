//! Dataset representation, CSV ingestion, stratified splitting, feature
//! standardization, and synthetic imbalanced-data generation.
//!
//! Label encoding is fixed: `1` is the minority/positive class, `0` the
//! majority. The CSV dialect is comma-separated, first row header, `.`
//! decimal point, UTF-8.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// A binary-labeled feature matrix. Label 1 marks the minority class.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub features: Array2<f64>,
    pub labels: Vec<u8>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset, checking shape consistency, label range, and
    /// feature finiteness. Presence of both classes is enforced later, at
    /// the sampler/trainer boundary.
    pub fn new(
        name: impl Into<String>,
        features: Array2<f64>,
        labels: Vec<u8>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::RowCountMismatch {
                rows: features.nrows(),
                labels: labels.len(),
            });
        }
        if feature_names.len() != features.ncols() {
            return Err(Error::InvalidArgument(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.ncols()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} outside {{0,1}}"
            )));
        }
        for ((row, column), v) in features.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFiniteFeature { row, column });
            }
        }
        Ok(Self {
            name: name.into(),
            features,
            labels,
            feature_names,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    /// Number of samples carrying the given label.
    pub fn count(&self, label: u8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn has_both_classes(&self) -> bool {
        self.count(0) >= 1 && self.count(1) >= 1
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    /// Feature rows of the given class, in original order.
    pub fn class_rows(&self, label: u8) -> Array2<f64> {
        let idx: Vec<usize> = self.class_indices(label);
        self.features.select(Axis(0), &idx)
    }

    pub fn class_indices(&self, label: u8) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == label)
            .map(|(i, _)| i)
            .collect()
    }

    /// Dataset restricted to the given row indices, keeping their order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Summary row in the style of a dataset characteristics table.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub name: String,
    pub imbalance_ratio: f64,
    pub n_samples: usize,
    pub n_features: usize,
}

impl DatasetMeta {
    /// Ratio rendered to 2 significant figures, e.g. `9.7:1` or `42:1`.
    pub fn ratio_display(&self) -> String {
        format!("{}:1", sig_figs(self.imbalance_ratio, 2))
    }
}

impl fmt::Display for DatasetMeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} samples, {} features, ratio {})",
            self.name,
            self.n_samples,
            self.n_features,
            self.ratio_display()
        )
    }
}

fn sig_figs(x: f64, figs: i32) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (figs - 1 - magnitude).max(0);
    format!("{:.*}", decimals as usize, x)
}

/// Majority/minority counts summarized as `DatasetMeta`.
pub fn meta(dataset: &Dataset) -> Result<DatasetMeta> {
    let majority = dataset.count(0);
    let minority = dataset.count(1);
    if majority == 0 || minority == 0 {
        return Err(Error::SingleClass {
            name: dataset.name.clone(),
        });
    }
    Ok(DatasetMeta {
        name: dataset.name.clone(),
        imbalance_ratio: majority as f64 / minority as f64,
        n_samples: dataset.n_samples(),
        n_features: dataset.n_features(),
    })
}

/// Disjoint train/test halves of one dataset.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl LabelColumn {
    /// Interprets the argument as a header name first; a bare integer that
    /// matches no header is treated as a 0-based column index.
    pub fn parse(s: &str) -> Self {
        LabelColumn::Name(s.to_string())
    }

    fn resolve(&self, headers: &[String]) -> Result<usize> {
        match self {
            LabelColumn::Name(name) => headers
                .iter()
                .position(|h| h == name)
                .or_else(|| {
                    name.parse::<usize>()
                        .ok()
                        .filter(|&i| i < headers.len())
                })
                .ok_or_else(|| Error::LabelColumnNotFound {
                    column: name.clone(),
                }),
            LabelColumn::Index(i) => {
                if *i < headers.len() {
                    Ok(*i)
                } else {
                    Err(Error::LabelColumnNotFound {
                        column: i.to_string(),
                    })
                }
            }
        }
    }
}

/// Loads a CSV file into a `Dataset`, mapping `positive_label` to 1 and the
/// single other label value to 0. Row order is preserved.
///
/// Error positions are 1-based: `row` counts data rows (header excluded),
/// `column` counts feature columns in file order (label column excluded).
pub fn load_csv(path: &Path, label_column: &LabelColumn, positive_label: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
            },
            _ => Error::CsvParse {
                path: path.to_path_buf(),
                source: e,
            },
        })?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::CsvParse {
            path: path.to_path_buf(),
            source: e,
        })?
        .iter()
        .map(|h| h.to_string())
        .collect();
    if headers.is_empty() {
        return Err(Error::EmptyDataset {
            path: path.to_path_buf(),
        });
    }
    let label_idx = label_column.resolve(&headers)?;

    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut rows: Vec<f64> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut n_rows = 0usize;
    for (record_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::CsvParse {
            path: path.to_path_buf(),
            source: e,
        })?;
        let row_no = record_idx + 1;
        let mut feature_col = 0usize;
        for (i, cell) in record.iter().enumerate() {
            if i == label_idx {
                raw_labels.push(cell.to_string());
                continue;
            }
            feature_col += 1;
            let value: f64 = cell.trim().parse().unwrap_or(f64::NAN);
            if !value.is_finite() {
                return Err(Error::NonNumericCell {
                    row: row_no,
                    column: feature_col,
                    name: feature_names
                        .get(feature_col - 1)
                        .cloned()
                        .unwrap_or_default(),
                    value: cell.to_string(),
                });
            }
            rows.push(value);
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(Error::EmptyDataset {
            path: path.to_path_buf(),
        });
    }

    let mut distinct: Vec<&String> = Vec::new();
    for l in &raw_labels {
        if !distinct.contains(&l) {
            distinct.push(l);
        }
    }
    if distinct.len() != 2 {
        return Err(Error::LabelCardinality {
            found: distinct.len(),
        });
    }
    if !distinct.iter().any(|l| l.as_str() == positive_label) {
        return Err(Error::PositiveLabelMissing {
            label: positive_label.to_string(),
        });
    }
    let labels: Vec<u8> = raw_labels
        .iter()
        .map(|l| u8::from(l == positive_label))
        .collect();

    let n_features = feature_names.len();
    let features = Array2::from_shape_vec((n_rows, n_features), rows)
        .expect("row-major feature buffer matches shape");
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    Dataset::new(name, features, labels, feature_names)
}

/// Writes a dataset in the same dialect `load_csv` reads. The label column
/// is written last, named `label`, with values 0/1. Feature values use the
/// shortest decimal form that round-trips exactly.
pub fn write_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut w = BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let mut header = dataset.feature_names.join(",");
    header.push_str(",label");
    writeln!(w, "{header}").map_err(io_err)?;
    for (i, row) in dataset.features.rows().into_iter().enumerate() {
        let mut line = String::new();
        for v in row.iter() {
            line.push_str(&format!("{v}"));
            line.push(',');
        }
        line.push_str(&dataset.labels[i].to_string());
        writeln!(w, "{line}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Seeded stratified holdout split.
///
/// Per-class test counts are `round(class_count × test_fraction)` with ties
/// rounding half up, clamped so each class keeps at least one sample on each
/// side. Row order within each half follows the original dataset.
pub fn stratified_split<R: Rng>(
    dataset: &Dataset,
    test_fraction: f64,
    rng: &mut R,
) -> Result<SplitPair> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidFraction {
            value: test_fraction,
        });
    }
    for label in [0u8, 1u8] {
        let count = dataset.count(label);
        if count < 2 {
            return Err(Error::ClassTooSmall { label, count });
        }
    }

    let mut test_indices: Vec<usize> = Vec::new();
    for label in [0u8, 1u8] {
        let mut indices = dataset.class_indices(label);
        let count = indices.len();
        let n_test = ((count as f64 * test_fraction + 0.5).floor() as usize).clamp(1, count - 1);
        indices.shuffle(rng);
        test_indices.extend_from_slice(&indices[..n_test]);
    }
    test_indices.sort_unstable();
    let train_indices: Vec<usize> = (0..dataset.n_samples())
        .filter(|i| test_indices.binary_search(i).is_err())
        .collect();

    Ok(SplitPair {
        train: dataset.select(&train_indices),
        test: dataset.select(&test_indices),
    })
}

/// Per-feature z-score transform fitted on training data.
///
/// Standard deviations use the population convention (denominator `n`).
/// Zero-variance features are flagged and map to all-zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub constant: Vec<bool>,
}

pub fn fit_standardizer(train: &Dataset) -> Result<Standardizer> {
    if train.n_samples() == 0 {
        return Err(Error::EmptyInput {
            what: "standardizer training data",
        });
    }
    let n = train.n_samples() as f64;
    let mut means = Vec::with_capacity(train.n_features());
    let mut stds = Vec::with_capacity(train.n_features());
    let mut constant = Vec::with_capacity(train.n_features());
    for col in train.features.columns() {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        means.push(mean);
        stds.push(std);
        constant.push(std == 0.0);
    }
    Ok(Standardizer {
        means,
        stds,
        constant,
    })
}

pub fn apply_standardizer(std: &Standardizer, data: &Dataset) -> Dataset {
    assert_eq!(
        std.means.len(),
        data.n_features(),
        "standardizer fitted on a different feature count"
    );
    let mut features = data.features.clone();
    for (j, mut col) in features.columns_mut().into_iter().enumerate() {
        if std.constant[j] {
            col.fill(0.0);
        } else {
            col.mapv_inplace(|v| (v - std.means[j]) / std.stds[j]);
        }
    }
    Dataset {
        name: data.name.clone(),
        features,
        labels: data.labels.clone(),
        feature_names: data.feature_names.clone(),
    }
}

impl Standardizer {
    /// Maps standardized coordinates back to the original feature space.
    /// Constant features recover their fitted mean.
    pub fn inverse_row(&self, row: &[f64]) -> Vec<f64> {
        assert_eq!(row.len(), self.means.len());
        row.iter()
            .enumerate()
            .map(|(j, &z)| {
                if self.constant[j] {
                    self.means[j]
                } else {
                    z * self.stds[j] + self.means[j]
                }
            })
            .collect()
    }
}

/// Two-Gaussian synthetic imbalanced dataset: the majority class is standard
/// normal at the origin, the minority is unit-covariance with its mean
/// shifted by `class_separation` along the first coordinate. Majority rows
/// come first.
pub fn make_synthetic<R: Rng>(
    n_majority: usize,
    n_minority: usize,
    n_features: usize,
    class_separation: f64,
    rng: &mut R,
) -> Result<Dataset> {
    if n_majority < 1 || n_minority < 1 || n_features < 1 {
        return Err(Error::InvalidArgument(
            "synthetic dataset needs at least one sample per class and one feature".to_string(),
        ));
    }
    if !class_separation.is_finite() || class_separation < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "class separation must be a finite non-negative real, got {class_separation}"
        )));
    }
    let n = n_majority + n_minority;
    let mut features = Array2::zeros((n, n_features));
    let normal = StandardNormal;
    for i in 0..n {
        let minority = i >= n_majority;
        for j in 0..n_features {
            let mut v: f64 = normal.sample(rng);
            if minority && j == 0 {
                v += class_separation;
            }
            features[[i, j]] = v;
        }
    }
    let mut labels = vec![0u8; n_majority];
    labels.extend(std::iter::repeat_n(1u8, n_minority));
    let feature_names = (0..n_features).map(|j| format!("x{j}")).collect();
    Dataset::new("synthetic", features, labels, feature_names)
}
