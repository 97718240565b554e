use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// What went wrong while reading a text input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseKind {
    Header,
    Shape,
    RowCount,
    ColumnCount,
    Number,
    NonFinite,
    NotUnitNorm,
    FieldMismatch,
    MissingNewline,
    Config,
}

impl std::fmt::Display for ParseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ParseKind::Header => "bad header",
            ParseKind::Shape => "bad shape line",
            ParseKind::RowCount => "wrong number of rows",
            ParseKind::ColumnCount => "wrong number of columns",
            ParseKind::Number => "malformed number",
            ParseKind::NonFinite => "non-finite number",
            ParseKind::NotUnitNorm => "vector is not unit norm",
            ParseKind::FieldMismatch => "imaginary part in a real packing",
            ParseKind::MissingNewline => "missing trailing newline",
            ParseKind::Config => "bad setting",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: String, found: String },

    #[error("column {column} has norm {norm}, outside tolerance {tol} of 1")]
    NotUnitNorm { column: usize, norm: f64, tol: f64 },

    #[error("column {column} has a nonzero imaginary part in a real frame")]
    NotReal { column: usize },

    #[error("column {column} has zero norm and cannot be normalized")]
    ZeroColumn { column: usize },

    #[error("non-finite entry in column {column}")]
    NonFinite { column: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{bound} bound is not applicable for d = {d}, n = {n}: {reason}")]
    Inapplicable {
        bound: &'static str,
        d: usize,
        n: usize,
        reason: &'static str,
    },

    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("line {line}: {kind}: {detail}")]
    Parse {
        line: usize,
        kind: ParseKind,
        detail: String,
    },

    #[error("catalog is locked by another writer ({0})")]
    Locked(PathBuf),

    #[error("catalog has no entry for {0}")]
    MissingEntry(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("catalog index line {line}: {source}")]
    Index {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, kind: ParseKind, detail: impl Into<String>) -> Self {
        Error::Parse {
            line,
            kind,
            detail: detail.into(),
        }
    }

    /// True for filesystem failures, as opposed to validation failures.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Locked(_))
    }
}
