use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inputs disagree on grid shape, cell count, or similar layout facts.
    #[error("structural mismatch: {0}")]
    Structural(String),

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("region {region}: cannot construct geometry: {reason}")]
    Construction { region: u32, reason: String },

    #[error("region {region}: line {line} has no ocean length")]
    EmptyLine { region: u32, line: usize },

    #[error("self-intersection repair failed after eta reached {eta}")]
    RepairFailed { eta: f64 },

    #[error("singular design: {0}")]
    SingularDesign(String),

    #[error("missing years in training series: {0:?}")]
    MissingYears(Vec<i32>),

    #[error("insufficient training data: {0}")]
    InsufficientData(String),

    #[error("posterior fit failed (region {region}): {reason}")]
    Fit { region: u32, reason: String },

    #[error("mixture weight undefined: every training pair is degenerate")]
    WeightUndefined,

    #[error("contour sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid file {path}: {reason}")]
    Format { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
