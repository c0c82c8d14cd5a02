use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown scenario `{name}` (valid: {valid})")]
    UnknownScenario { name: String, valid: String },

    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),

    #[error("failed to parse scenario config: {0}")]
    ConfigParse(#[from] toml::de::Error),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate geometry: {0}")]
    Geometry(String),

    #[error("scene has not been meshed for reflection order {0}")]
    Unmeshed(usize),

    #[error("impulse response carries no power")]
    EmptyImpulseResponse,

    #[error("user {0} has no assignment")]
    Unassigned(usize),

    #[error("assignment is infeasible: {0}")]
    Infeasible(String),

    #[error("search space of {size:e} assignments exceeds the cap of {cap:e}")]
    SearchSpaceTooLarge { size: f64, cap: f64 },

    #[error("big-M constant {alpha:e} does not dominate the attainable SINR bound {bound:e}")]
    AlphaTooSmall { alpha: f64, bound: f64 },

    #[error("{path}: {err}")]
    Io { path: PathBuf, err: std::io::Error },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            err,
        }
    }
}
