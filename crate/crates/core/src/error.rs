use std::path::PathBuf;

use crate::geometry::ItemId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch{}: expected {expected}, found {found}", fmt_id(.id))]
    DimensionMismatch {
        expected: usize,
        found: usize,
        id: Option<ItemId>,
    },

    #[error("vector {id} has zero norm")]
    ZeroNorm { id: ItemId },

    #[error("vector {id} has a non-finite coordinate")]
    NonFinite { id: ItemId },

    #[error("vector {id} is empty (dimension must be at least 1)")]
    EmptyVector { id: ItemId },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("duplicate item id {0}")]
    DuplicateId(ItemId),

    #[error("unknown item id {0}")]
    UnknownId(ItemId),

    #[error("requested {requested} {what} but only {available} available")]
    TooMany {
        what: &'static str,
        requested: usize,
        available: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cluster {0} has no members")]
    EmptyCluster(u32),

    #[error("operation requires cluster labels on every node")]
    MissingLabels,

    #[error("personalized pagerank did not converge after {iterations} iterations (L1 residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("could only place {placed} of {requested} centroids at separation {separation}")]
    CentroidPlacement {
        placed: usize,
        requested: usize,
        separation: f64,
    },

    #[error("could not draw a nonzero composite query after {0} attempts")]
    DegenerateQuery(usize),

    #[error("plotting needs 2-dimensional data, got dimension {0}; generate a 2D dataset")]
    PlotDimension(usize),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

fn fmt_id(id: &Option<ItemId>) -> String {
    match id {
        Some(id) => format!(" at item {id}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Wraps the error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
