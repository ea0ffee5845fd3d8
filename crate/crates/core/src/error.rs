use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Domain and I/O errors. [`Error::name`] gives the stable identifier the CLI
/// prints.
#[derive(Debug, Error)]
pub enum Error {
    #[error("corpus contains no documents")]
    EmptyCorpus,
    #[error("no term survives filtering (min_total_frequency = {min_total_frequency})")]
    AllTermsFiltered { min_total_frequency: usize },
    #[error("term {term} (1-based) has zero total count")]
    TermAbsent { term: usize },
    #[error("shuffle infeasible: {tokens} tokens for {docs} documents")]
    Infeasible { tokens: u64, docs: usize },
    #[error("matrix has no nonzero entry")]
    ZeroMatrix,
    #[error("{what} {index} (1-based) out of range (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },
    #[error("vector has no nonzero entry")]
    ZeroVector,
    #[error("leading vectors {first} and {second} share sigma {sigma} within the gap tolerance")]
    Degenerate {
        first: usize,
        second: usize,
        sigma: f64,
    },
    #[error("degenerate eigenvalue pairs {pairs:?} (gap tolerance {gap_tol})")]
    DegenerateSpectrum {
        pairs: Vec<(usize, usize)>,
        gap_tol: f64,
    },
    #[error("closed form undefined: a = b, d = f and eps * z = 0")]
    DegenerateInput,
    #[error("blocks overlap: {0}")]
    OverlappingBlocks(String),
    #[error("documents {0:?} are not assigned to a block")]
    IncompleteAssignment(Vec<usize>),
    #[error("topic {0} is empty")]
    EmptyTopic(usize),
    #[error("query has no in-vocabulary term")]
    EmptyQuery,
    #[error("no relevant documents")]
    NoRelevantDocs,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("Eckart-Young identity violated: explicit {explicit} vs spectral tail {tail}")]
    EckartYoungViolation { explicit: f64, tail: f64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::EmptyCorpus => "EmptyCorpus",
            Error::AllTermsFiltered { .. } => "AllTermsFiltered",
            Error::TermAbsent { .. } => "TermAbsent",
            Error::Infeasible { .. } => "Infeasible",
            Error::ZeroMatrix => "ZeroMatrix",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::ZeroVector => "ZeroVector",
            Error::Degenerate { .. } => "Degenerate",
            Error::DegenerateSpectrum { .. } => "DegenerateSpectrum",
            Error::DegenerateInput => "DegenerateInput",
            Error::OverlappingBlocks(_) => "OverlappingBlocks",
            Error::IncompleteAssignment(_) => "IncompleteAssignment",
            Error::EmptyTopic(_) => "EmptyTopic",
            Error::EmptyQuery => "EmptyQuery",
            Error::NoRelevantDocs => "NoRelevantDocs",
            Error::InvalidPartition(_) => "InvalidPartition",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::Parse { .. } => "ParseError",
            Error::EckartYoungViolation { .. } => "EckartYoungViolation",
            Error::Io(_) => "IoError",
            Error::Json(_) => "JsonError",
        }
    }
}
