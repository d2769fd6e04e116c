use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid generator spec `{0}`: {1}")]
    InvalidSpec(String, String),
    #[error("shift system is not a Riesz sequence: minimal symbol eigenvalue {0:e}")]
    RieszViolation(f64),
    #[error("Gramian symbol nearly singular: minimal eigenvalue {0:e}")]
    NearSingularSymbol(f64),
    #[error("coefficient window too small: boundary mass ratio {0:e}")]
    WindowTooSmall(f64),
    #[error("lattice truncation K={k} too small, need at least {need}")]
    TruncationTooSmall { k: i64, need: i64 },
    #[error("eigen solver failed: {0}")]
    EigenFailure(String),
    #[error("index {index} out of range ({len} available)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("no eigenvalue reaches {0}")]
    EmptyEigenspace(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("non-finite value for {0}")]
    Overflow(String),
    #[error("diagnostic failed: {0}")]
    DiagnosticFailure(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error on {path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status: 1 for failed checks and numerical errors, 2 for
    /// usage errors, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::File { .. } | Error::Csv(_) => 3,
            _ => 1,
        }
    }
}
