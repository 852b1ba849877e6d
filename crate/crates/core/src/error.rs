use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column {column:?}: cannot parse {value:?} as a finite number")]
    Cell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("invalid column spec: {0}")]
    ColSpec(String),

    #[error("overlapping assignment: column {0:?} is assigned to more than one block")]
    OverlappingAssignment(String),

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("too few rows: need at least {needed}, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("single-class input: every label is {0}")]
    SingleClass(u8),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("graph line {line}: {message}")]
    GraphSyntax { line: usize, message: String },

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("unknown node {0:?}")]
    UnknownNode(String),

    #[error("missing column {0:?}")]
    MissingColumn(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
