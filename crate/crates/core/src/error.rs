use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("duplicate institution id `{0}`")]
    DuplicateId(String),
    #[error("unknown value `{token}` for {field}")]
    UnknownLevel { field: &'static str, token: String },
    #[error("inconsistent record `{id}`: {reason}")]
    InconsistentRecord { id: String, reason: String },
    #[error("row {row} (`{id}`): non-positive {column} under log transform")]
    NonPositiveLog { row: usize, id: String, column: &'static str },
    #[error("graph is disconnected ({} components)", components.len())]
    Disconnected { components: Vec<Vec<usize>> },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("rank-deficient design: column `{column}` is collinear with {with:?}")]
    RankDeficient { column: String, with: Vec<String> },
    #[error("too few samples: {samples} rows for {columns} columns")]
    TooFewSamples { samples: usize, columns: usize },
    #[error("complete or quasi-complete separation on `{column}`; consider a penalized fit")]
    Separation { column: String },
    #[error("response has a single class")]
    SingleClass,
    #[error("total edge weight is zero")]
    ZeroWeight,
    #[error("empty corpus")]
    EmptyCorpus,
}

impl Error {
    /// Whether the error is a numerical failure rather than bad data.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::RankDeficient { .. }
                | Error::Separation { .. }
                | Error::TooFewSamples { .. }
                | Error::SingleClass
                | Error::ZeroWeight
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
