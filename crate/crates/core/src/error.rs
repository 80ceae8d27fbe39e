use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("case parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("duplicate {what} id {id}")]
    DuplicateId { what: &'static str, id: i64 },

    #[error("network must have exactly one slack bus, found {0}")]
    SlackCount(usize),

    #[error("unknown bus id {0}")]
    UnknownBus(i64),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("power flow did not converge after {iterations} iterations (mismatch {mismatch:.3e} pu)")]
    PowerFlowDiverged { iterations: usize, mismatch: f64 },

    #[error("voltage magnitude is zero; complex frequency undefined")]
    ZeroMagnitude,

    #[error("singular stator impedance (ra^2 + xd' xq' = 0)")]
    SingularStator,

    #[error("limit violated at initialization: {0}")]
    LimitViolation(String),

    #[error("model assembly failed: {0}")]
    Assembly(String),

    #[error("integration step failed at t = {t:.6} s after {halvings} step halvings (residual {residual:.3e})")]
    StepFailure { t: f64, halvings: usize, residual: f64 },

    #[error("algebraic equations could not be solved: {0}")]
    AlgebraicSolve(String),

    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),

    #[error("no mode satisfies the frequency-control criteria")]
    NoQualifyingMode,

    #[error("{0} modes satisfy the frequency-control criteria")]
    AmbiguousMode(usize),

    #[error("zero-norm vector in observability computation")]
    ZeroVector,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
