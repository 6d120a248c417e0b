use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive definite (leading minor {minor} of {size})")]
    NotPositiveDefinite { minor: usize, size: usize },

    #[error("singular block `{block}` in partitioned inverse")]
    SingularBlock { block: &'static str },

    #[error("coordinate descent did not converge after {sweeps} sweeps (last change {gap:.3e})")]
    NoConvergence {
        sweeps: usize,
        gap: f64,
        coefficients: Vec<f64>,
    },

    #[error("equation {equation}: {source}")]
    Equation {
        equation: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("non-positive structural variance for shock {0}")]
    NonPositiveShockVariance(usize),

    #[error("zero forecast-error variance for series {0}")]
    ZeroForecastVariance(usize),

    #[error("{clusters} clusters give too many orderings to average; supply an explicit order")]
    TooManyOrderings { clusters: usize },

    #[error("no rolling window could be estimated")]
    NoWindows,

    #[error("missing scheme `{0}` in measure series")]
    MissingScheme(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
