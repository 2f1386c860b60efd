//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: undefined on a graph with {nodes} node(s)")]
    UndefinedOnGraph { op: &'static str, nodes: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("cannot open {path}: {source}")]
    FileOpen {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    FileWrite {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed row: {message}")]
    MalformedRow {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}:{line}: unknown region label {label:?} (expected Mainland, HongKong, Taiwan or Other)")]
    UnknownRegion {
        path: PathBuf,
        line: u64,
        label: String,
    },

    #[error("{path}:{line}: cast row references unknown {kind} {key:?}")]
    DanglingKey {
        path: PathBuf,
        line: u64,
        kind: &'static str,
        key: String,
    },

    #[error("{path}:{line}: duplicate {kind} id {key:?}")]
    DuplicateKey {
        path: PathBuf,
        line: u64,
        kind: &'static str,
        key: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("period {period}: degenerate null model, expected cross-region count is zero")]
    DegenerateNull { period: String },

    #[error("period {period}: index requires nodes of both regions, found only {found}")]
    SingleRegion { period: String, found: String },

    #[error("unknown node attribute {name:?}")]
    UnknownAttribute { name: String },

    #[error("attribute {attr:?} has no level {level:?} and none was declared")]
    UnknownLevel { attr: String, level: String },

    #[error("attribute {attr:?} is not numeric")]
    NonNumericAttribute { attr: String },

    #[error("design would have {n_dyads} dyads, above the cap of {cap}")]
    DyadCapExceeded { n_dyads: usize, cap: usize },

    #[error("exact enumeration is limited to 6 nodes, got {n}")]
    OracleTooLarge { n: usize },

    #[error("perfect separation detected: term {term:?} completely predicts the response")]
    Separation { term: String },

    #[error("design matrix is rank deficient; collinear column(s): {}", terms.join(", "))]
    RankDeficient { terms: Vec<String> },

    #[error("term {term:?} is missing from the fit for period {period}")]
    MissingTerm { term: String, period: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Coarse classification used by callers that map errors to exit codes.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::FileOpen { .. }
                | Error::MalformedRow { .. }
                | Error::UnknownRegion { .. }
                | Error::DanglingKey { .. }
                | Error::DuplicateKey { .. }
        )
    }

    pub fn is_numeric_error(&self) -> bool {
        matches!(
            self,
            Error::DegenerateNull { .. }
                | Error::Separation { .. }
                | Error::RankDeficient { .. }
                | Error::DyadCapExceeded { .. }
                | Error::SingleRegion { .. }
        )
    }
}
