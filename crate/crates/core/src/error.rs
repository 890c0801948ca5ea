use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad or unusable input data.
    Data,
    /// The data were fine but a model could not be estimated.
    Estimation,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("nonpositive productivity {value} for region {region} in {year}")]
    NonPositive { region: String, year: i32, value: f64 },

    #[error("no usable transitions in panel")]
    NoTransitions,

    #[error("missing structural variable {name} for region {region} in {year}")]
    MissingStructural { name: String, region: String, year: i32 },

    #[error("empty selection")]
    EmptySelection,

    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },

    #[error("line {line}: duplicate key ({region}, {year}, {sector})")]
    DuplicateKey { line: u64, region: String, year: i32, sector: String },

    #[error("missing employment for region {region}, sector {sector}, year {year}")]
    MissingEmployment { region: String, sector: String, year: i32 },

    #[error("invalid location quotient inputs: {0}")]
    InvalidEmployment(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report: {0}")]
    Report(String),

    #[error("rank-deficient design: column {column} is collinear with earlier columns")]
    RankDeficient { column: String },

    #[error("need more observations than parameters (n = {n}, k = {k})")]
    TooFewObservations { n: usize, k: usize },

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("degenerate variance components: {0}")]
    DegenerateVariance(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("replication {replication}: {source}")]
    Replication {
        replication: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("degrees of freedom must be at least 1 (got {0})")]
    DegreesOfFreedom(usize),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::RankDeficient { .. }
            | Error::TooFewObservations { .. }
            | Error::InvalidDesign(_)
            | Error::DegenerateVariance(_)
            | Error::DegreesOfFreedom(_) => ErrorKind::Estimation,
            Error::Replication { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }
}
