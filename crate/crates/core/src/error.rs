use std::path::PathBuf;

use thiserror::Error;

use crate::indicator::StratumKey;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // indicator arithmetic
    #[error("EmptyTable: the stratified table has no strata")]
    EmptyTable,
    #[error("ZeroDenominator: total number of papers is zero")]
    ZeroDenominator,
    #[error("ZeroStratumSize: stratum {0} has no papers on the requested side")]
    ZeroStratumSize(StratumKey),
    #[error("ZeroWorldProportion: world proportion is zero{}", fmt_key(.0))]
    ZeroWorldProportion(Option<StratumKey>),
    #[error("ZeroProportion: a mentioned proportion is zero{}", fmt_key(.0))]
    ZeroProportion(Option<StratumKey>),
    #[error("ZeroDenominatorS: Mantel-Haenszel denominator S is zero")]
    ZeroDenominatorS,
    #[error("MissingStratum: no world proportion for stratum {0}")]
    MissingStratum(StratumKey),
    #[error("EmptyGroup: the group has no papers")]
    EmptyGroup,
    #[error("AlreadyApplied: continuity correction was already applied")]
    AlreadyApplied,
    #[error("InvalidCounts: {0}")]
    InvalidCounts(String),
    #[error("DuplicateStratum: {0}")]
    DuplicateStratum(StratumKey),

    // cohort
    #[error("InvalidScore: recommendation score {0} is not in {{1, 2, 3}}")]
    InvalidScore(i64),
    #[error("NegativeScore: average recommendation score {0} is negative")]
    NegativeScore(f64),
    #[error("AllStrataRemoved: no stratum survived filtering")]
    AllStrataRemoved,

    // ingest
    #[error("MalformedRow: {path}:{line}: {reason}")]
    MalformedRow {
        path: PathBuf,
        line: u64,
        reason: String,
    },
    #[error("DuplicateId: {id} ({path}:{line})")]
    DuplicateId {
        id: String,
        path: PathBuf,
        line: u64,
    },
    #[error("NegativeCount: {path}:{line}: count {count} for id {id}")]
    NegativeCount {
        id: String,
        count: i64,
        path: PathBuf,
        line: u64,
    },
    #[error("UnknownSource: {0}")]
    UnknownSource(String),
    #[error("InvalidManifest: {0}")]
    InvalidManifest(String),
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    // bootstrap
    #[error("DegenerateReplicates: {failed} of {total} replicates could not be computed")]
    DegenerateReplicates { failed: usize, total: usize },
}

fn fmt_key(key: &Option<StratumKey>) -> String {
    match key {
        Some(k) => format!(" in stratum {k}"),
        None => String::new(),
    }
}

impl Error {
    /// True for errors caused by malformed or unusable input files and
    /// configuration, as opposed to failures of the indicator arithmetic.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::MalformedRow { .. }
                | Error::DuplicateId { .. }
                | Error::NegativeCount { .. }
                | Error::InvalidScore(_)
                | Error::UnknownSource(_)
                | Error::InvalidManifest(_)
                | Error::InvalidConfig(_)
                | Error::Io { .. }
                | Error::Json { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
