//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV in {path}: {source}")]
    CsvParse {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("empty dataset: {path} has no data rows")]
    EmptyDataset { path: PathBuf },

    #[error("non-numeric value {value:?} at row {row}, column {column} ({name:?})")]
    NonNumericCell {
        row: usize,
        column: usize,
        name: String,
        value: String,
    },

    #[error("label column {column:?} not found")]
    LabelColumnNotFound { column: String },

    #[error("label column has {found} distinct values, expected exactly 2")]
    LabelCardinality { found: usize },

    #[error("positive label {label:?} does not occur in the label column")]
    PositiveLabelMissing { label: String },

    #[error("feature matrix has {rows} rows but {labels} labels")]
    RowCountMismatch { rows: usize, labels: usize },

    #[error("non-finite feature value at row {row}, column {column}")]
    NonFiniteFeature { row: usize, column: usize },

    #[error("dataset {name:?} contains a single class; both classes are required")]
    SingleClass { name: String },

    #[error("class {label} has {count} samples; stratified splitting requires at least 2 per class")]
    ClassTooSmall { label: u8, count: usize },

    #[error("test fraction must lie in (0, 1), got {value}")]
    InvalidFraction { value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} must not be empty")]
    EmptyInput { what: &'static str },

    #[error("{what}: expected dimension {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("bandwidth for feature {feature} is zero; pointwise density is undefined")]
    DegenerateBandwidth { feature: usize },

    #[error("invalid bandwidth grid: {0}")]
    InvalidGrid(String),

    #[error("LOO requires ≥ 2 points, got {n}")]
    LooRequiresTwoPoints { n: usize },

    #[error("true density returned a non-finite value")]
    NonFiniteDensity,

    #[error("non-finite value in {what}")]
    NonFiniteInput { what: &'static str },

    #[error("minority count {minority} exceeds majority count {majority}; labels appear inverted")]
    LabelsInverted { minority: usize, majority: usize },

    #[error("prediction and label vectors have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid training configuration: {0}")]
    InvalidTrainConfig(String),

    #[error("training diverged: non-finite loss at epoch {epoch}, batch {batch}")]
    TrainingDiverged { epoch: usize, batch: usize },

    #[error("invalid experiment configuration: {0}")]
    ConfigInvalid(String),

    #[error("cannot parse {path}: {source}")]
    JsonParse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("unsupported model format: {0}")]
    ModelFormat(String),
}
