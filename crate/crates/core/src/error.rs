use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("exact intersection is only implemented in two dimensions, got {0}")]
    ExactRequires2d(usize),

    #[error("reach horizon must be at least one step")]
    ZeroHorizon,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("disturbance with 1-norm {norm} lies outside the ball of radius {radius}")]
    DisturbanceOutsideBall { norm: f64, radius: f64 },

    #[error("an action was supplied in the middle of a mode-1 cycle (t_d = {t_d})")]
    ActionMidCycle { t_d: usize },

    #[error("no action supplied at a decision instant")]
    MissingAction,

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("initial set is not contained in the domain")]
    InitOutsideDomain,

    #[error("action sequence is not admissible")]
    NotAdmissible,

    #[error("state limit of {0} exceeded")]
    StateLimit(usize),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
