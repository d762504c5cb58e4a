use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation
    /// (non-finite score, non-positive scale, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter lies outside the support of a prior.
    #[error("parameter outside prior support: {0}")]
    Support(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dataset has no true conditional probabilities")]
    MissingCondProb,

    #[error("the zero-one loss cannot be used as a surrogate")]
    NotSurrogate,

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("prior weight of candidate {index} is zero, KL divergence is infinite")]
    InfiniteKl { index: usize },

    #[error("rejection sampler exceeded {proposals} proposals (acceptance rate estimate {acceptance_rate:.3e})")]
    Sampling { proposals: u64, acceptance_rate: f64 },

    #[error("chain acceptance rate {acceptance_rate:.4} below {threshold}; proposal scale is mis-tuned")]
    Diagnostics { acceptance_rate: f64, threshold: f64 },

    #[error("every candidate has excess risk below the floor {floor:e}")]
    InsufficientSpread { floor: f64 },

    #[error("need at least {needed} points with positive mean, found {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("objective increased from {before} to {after} at iteration {iteration}")]
    Optimization {
        iteration: usize,
        before: f64,
        after: f64,
        trace: Vec<f64>,
    },

    #[error("index ({row}, {col}) outside a {rows}x{cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cell n={n} replicate={replicate} seed={seed}: {source}")]
    Cell {
        n: usize,
        replicate: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
