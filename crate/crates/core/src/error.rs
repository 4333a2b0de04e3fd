use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// The variants map onto the process exit codes used by the command-line
/// front end: input/schema problems, data problems and numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates an operation's precondition.
    #[error("invalid input: {0}")]
    Input(String),

    /// Malformed or inconsistent data (CSV rows, unbalanced panels, ...).
    #[error("data error: {0}")]
    Data(String),

    /// A required CSV column is absent.
    #[error("missing column `{0}`")]
    MissingColumn(String),

    /// The design has no identifiable regressors left after collinearity checks.
    #[error("rank deficient design: collinear columns [{}]", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    /// An iterative routine did not meet its tolerance.
    #[error("{routine} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        routine: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// Variance-covariance or interval computation is undefined for this input.
    #[error("inference error: {0}")]
    Inference(String),

    /// Pearson correlation with a zero-variance vector.
    #[error("correlation undefined: {0} has zero variance")]
    UndefinedCorrelation(&'static str),

    /// A signal with no variation where one is required (silent excerpt, silent corpus).
    #[error("degenerate signal: {0}")]
    Degenerate(String),

    /// A codec failed to reproduce its input.
    #[error("codec `{codec}` failed: {reason}")]
    Codec { codec: String, reason: String },

    #[error("malformed RIFF/WAVE header: {0}")]
    WavHeader(String),

    #[error("unsupported WAVE format: {0}")]
    WavUnsupported(String),

    #[error("truncated WAVE data chunk: expected {expected} bytes, found {found}")]
    WavTruncated { expected: usize, found: usize },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable kind, used in error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Data(_) | Error::MissingColumn(_) | Error::Csv(_) => "data",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Inference(_) => "inference",
            Error::UndefinedCorrelation(_) => "undefined_correlation",
            Error::Degenerate(_) => "degenerate",
            Error::Codec { .. } => "codec",
            Error::WavHeader(_) | Error::WavUnsupported(_) | Error::WavTruncated { .. } => "wav",
            Error::ModelFormat(_) => "model_format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// True for numerical failures (solver or demeaning non-convergence).
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
