use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("M must be even (got M = {0})")]
    OddMultirate(usize),

    #[error("invalid tableau: {0}")]
    InvalidTableau(String),

    #[error("bar and tilde halves differ in block [{0}]")]
    HalvesDiffer(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("Newton iteration did not converge after {iters} iterations (residual norm {residual:e})")]
    NewtonDiverged { iters: usize, residual: f64 },

    #[error("singular Newton matrix after {iters} iterations")]
    SingularJacobian { iters: usize },

    #[error("step {index} (t = {time}) failed: {source}")]
    StepFailed {
        index: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("state is no longer finite")]
    NonFinite,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid composition weights: {0}")]
    Weights(String),

    #[error("t_end / H = {0} is not an integer")]
    NonIntegralSteps(f64),

    #[error("reference solution failed its self-consistency check: half-step deviation {deviation:e} > {tol:e}")]
    Reference { deviation: f64, tol: f64 },

    #[error("unknown {kind} '{name}' (available: {available})")]
    Unknown {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn tableau(msg: impl Into<String>) -> Self {
        Error::InvalidTableau(msg.into())
    }
}
