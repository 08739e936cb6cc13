use thiserror::Error;

/// Errors raised by partition construction, comparison and consensus solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("label {label} at point {point} is out of range for {n_clusters} clusters")]
    LabelOutOfRange {
        point: usize,
        label: usize,
        n_clusters: usize,
    },
    #[error("empty input")]
    EmptyInput,
    #[error("column {column} sums to {sum}, expected 1")]
    ColumnSumViolation { column: usize, sum: f64 },
    #[error("entry ({row}, {column}) = {value} lies outside [0, 1]")]
    EntryOutOfRange { row: usize, column: usize, value: f64 },
    #[error("ragged matrix: row {row} has {found} entries, expected {expected}")]
    RaggedRows {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("shape mismatch: {left_clusters}x{left_points} vs {right_clusters}x{right_points}")]
    ShapeMismatch {
        left_clusters: usize,
        left_points: usize,
        right_clusters: usize,
        right_points: usize,
    },
    #[error("point count mismatch: {left} vs {right}")]
    PointCountMismatch { left: usize, right: usize },
    #[error("norm order p = {0} must be >= 1")]
    InvalidOrder(f64),
    #[error("cost matrix contains a non-finite entry at ({row}, {column})")]
    NonFiniteCost { row: usize, column: usize },
    #[error("cost matrix is not square")]
    NonSquareCost,
    #[error("{n_clusters} clusters exceed the enumeration limit of {limit}")]
    TooManyClusters { n_clusters: usize, limit: usize },
    #[error("set of partitions is empty")]
    EmptySet,
    #[error("pair counting needs at least two points")]
    SinglePoint,
    #[error("{criterion} is undefined: zero denominator")]
    DegeneratePartition { criterion: &'static str },
    #[error("sample is empty")]
    EmptySample,
    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
