use crate::model::{JobId, TraceViolation};

/// Errors surfaced by the library. Configuration and domain errors are
/// recoverable; `ContractBreach` signals a bug in a mechanism implementation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no jobs")]
    NoJobs,
    #[error("invalid job {id}: {reason}")]
    InvalidJob { id: JobId, reason: String },
    #[error("duplicate job id {0}")]
    DuplicateJobId(JobId),
    #[error("unknown job id {0}")]
    UnknownJob(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("outside the mechanism domain: {0}")]
    Domain(String),
    #[error("infeasible-virtual-demand: job {0} cannot fit its virtual demand before its virtual deadline")]
    InfeasibleVirtualDemand(JobId),
    #[error("contract breach: {0}")]
    ContractBreach(String),
    #[error("monotonicity violation: {0}")]
    MonotonicityViolation(String),
    #[error("instance has {n} jobs, above the size cap of {cap}")]
    SizeCap { n: usize, cap: usize },
    #[error("job {0} has no decision")]
    Undecided(JobId),
    #[error("latest-fit could not place job {0}")]
    PlacementFailed(JobId),
    #[error("invalid trace: {0}")]
    Trace(Box<TraceViolation>),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<TraceViolation> for Error {
    fn from(v: TraceViolation) -> Self {
        Error::Trace(Box::new(v))
    }
}

impl From<crate::rational::ParseRationalError> for Error {
    fn from(e: crate::rational::ParseRationalError) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
