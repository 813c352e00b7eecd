use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} features, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("class label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("negative probability mass {value} at index {index}")]
    NegativeMass { index: usize, value: f64 },

    #[error("non-finite value {0}")]
    NonFinite(f64),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("row {row}: cannot parse `{cell}` in column `{column}` as a number")]
    UnparseableCell {
        row: usize,
        column: String,
        cell: String,
    },

    #[error("row {row}: unknown label value `{value}`")]
    UnknownLabel { row: usize, value: String },

    #[error("example with seq {0} has no group key")]
    Ungrouped(u64),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
