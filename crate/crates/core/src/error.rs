use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates the model or design constraints.
    #[error("invalid parameters: {0}")]
    InvalidParameter(String),

    #[error("invalid population: {0}")]
    InvalidPopulation(String),

    #[error("sample is empty")]
    EmptySample,

    #[error("ratio estimator undefined for non-positive sample mean of x (got {0})")]
    NonPositiveMean(f64),

    /// All auxiliary values are equal, so the regression slope is undefined.
    #[error("degenerate auxiliary variable: S_x^2 = 0, regression slope undefined")]
    DegenerateAuxiliary,

    #[error(
        "C({population}, {sample}) exceeds the enumeration cap of {cap} subsets; \
         use sampled_design_expectation instead"
    )]
    EnumerationCap {
        population: usize,
        sample: usize,
        cap: u64,
    },

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("{source_name}, line {line}: {message}")]
    Parse {
        source_name: String,
        line: u64,
        message: String,
    },

    #[error("unknown reproduction target `{0}` (expected table1, table2, table3 or mc_check)")]
    UnknownTarget(String),

    #[error("thread pool: {0}")]
    ThreadPool(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
