use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("non-dissipative parameters (alpha = {alpha}, beta = {beta}); decay theory requires alpha < beta")]
    NonDissipative { alpha: f64, beta: f64 },

    #[error("mode set is empty")]
    EmptyModes,

    #[error("mode list not ascending/positive at entry {index}: {reason}")]
    InvalidModes { index: usize, reason: String },

    #[error(
        "mode mu = {mu} is defective (repeated eigenvalue {eigenvalue} with geometric multiplicity one); \
         the block can not be made to be normal in any scalar product"
    )]
    DefectiveMode { mu: f64, eigenvalue: f64 },

    #[error("mode mu = {mu} has no repeated eigenvalue; use the normalizing Gram metric instead")]
    NotDefective { mu: f64 },

    #[error("ill-conditioned modal system at mu = {mu} (condition estimate {condition:e}); reclassify the mode")]
    IllConditioned { mu: f64, condition: f64 },

    #[error("step size {dt} too large: dt * |lambda|max = {product} must stay below {limit}")]
    StepTooLarge { dt: f64, product: f64, limit: f64 },

    #[error("time grid too coarse: {reason}")]
    GridTooCoarse { reason: String },

    #[error("metric does not match mode set: {reason}")]
    MetricMismatch { reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no witness mode found: {0}")]
    NotFound(String),

    #[error("{path}:{line}: {reason}")]
    ModeFile {
        path: String,
        line: usize,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(name, value, "must be finite and positive"))
    }
}
