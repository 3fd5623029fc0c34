use thiserror::Error;

/// Errors produced anywhere in the laboratory pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("insufficient boundary resolution: {segments} segments (need at least {min})")]
    InsufficientResolution { segments: usize, min: usize },

    #[error("meshing failure at {feature}: {reason}")]
    Meshing { feature: String, reason: String },

    #[error("point ({x}, {y}) lies outside the mesh hull")]
    OutsideMesh { x: f64, y: f64 },

    #[error("coefficient is not symmetric positive definite at ({x}, {y})")]
    CoefficientNotSpd { x: f64, y: f64 },

    #[error("system not SPD: {0}")]
    NotSpd(String),

    #[error("singular {what} system: {reason}")]
    Singular { what: &'static str, reason: String },

    #[error("conflicting Dirichlet prescriptions at node {node}: {first} vs {second}")]
    ConflictingDirichlet { node: usize, first: f64, second: f64 },

    #[error("h = {h} outside admissible range K = (-{limit}, {limit})")]
    OutsideAdmissibleRange { h: f64, limit: f64 },

    #[error("no convergence after {iterations} iterations: {what}")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("too many sample points skipped: {skipped} of {total}")]
    SampleCoverage { skipped: usize, total: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("solver failed at h = {h}: {source}")]
    AtTranslation {
        h: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config error{}: {message}", location.as_ref().map(|l| format!(" ({l})")).unwrap_or_default())]
    Config {
        location: Option<String>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
