use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("direction {direction} is out of range for a {dim}-dimensional grid")]
    InvalidDirection { direction: usize, dim: usize },

    #[error("field has {found} values but the grid has {expected} interior nodes")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("field contains a non-finite value at index {index}")]
    NonFiniteField { index: usize },

    #[error("{what} is not finite ({value}) at t = {t:?}, x = {x:?}")]
    NonFinite {
        what: &'static str,
        t: Option<f64>,
        x: Vec<f64>,
        value: f64,
    },

    #[error("diffusion coefficient must be positive, got {0}")]
    NonPositiveDiffusion(f64),

    #[error("step size must be positive, got {0}")]
    NonPositiveStep(f64),

    #[error("invalid quadrature rule: {0}")]
    InvalidQuadrature(String),

    #[error("invalid stage nodes: {0}")]
    InvalidNodes(String),

    #[error("invalid Parareal run: {0}")]
    InvalidRun(String),

    #[error("fine sweep failed on coarse interval {interval}: {source}")]
    Worker {
        interval: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown problem label '{0}'")]
    UnknownProblem(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid experiment: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
