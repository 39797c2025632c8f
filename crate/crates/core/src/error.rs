use thiserror::Error;

/// Everything that can go wrong between reading a graph document and
/// emitting a report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed graph document: {0}")]
    Parse(String),

    #[error("non-positive length on edge {edge}")]
    NonPositiveLength { edge: String },

    #[error("edge {edge} refers to undeclared vertex {vertex}")]
    DanglingEndpoint { edge: String, vertex: String },

    #[error("duplicate id {0}")]
    DuplicateId(String),

    #[error("graph is disconnected: transition matrix is not irreducible")]
    Disconnected,

    #[error("bipartite: the transition matrix has period 2; not supported")]
    Bipartite,

    #[error("trivial homology: the graph is a tree (b = 0)")]
    TrivialHomology,

    #[error("transition matrix is not aperiodic: A^k has zero entries for every k <= {bound}")]
    NotAperiodic { bound: usize },

    #[error("not a spanning tree: {0}")]
    NotSpanningTree(String),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    PerronNonConvergence { iterations: usize, residual: f64 },

    #[error("not at equilibrium: pressure(h, 0) = {pressure:e}")]
    NotAtEquilibrium { pressure: f64 },

    #[error("root bracketing failed for pressure equation at u = {u:?}")]
    BracketFailure { u: Vec<f64> },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("derivative step calibration failed: achieved relative accuracy {achieved:e}")]
    Calibration { achieved: f64 },

    #[error("census budget exceeded: needs about {required_mb} MB, budget is {budget_mb} MB")]
    BudgetExceeded { required_mb: u64, budget_mb: u64 },

    #[error("census period bound too small: T = {t} needs n_max >= {required}, have {n_max}")]
    InsufficientPeriod { t: f64, required: usize, n_max: usize },

    #[error("graph does not have the required topology: {0}")]
    Topology(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Parse(_) => 1,
            Error::NonPositiveLength { .. }
            | Error::DanglingEndpoint { .. }
            | Error::DuplicateId(_) => 1,
            Error::Disconnected
            | Error::Bipartite
            | Error::TrivialHomology
            | Error::NotAperiodic { .. }
            | Error::NotSpanningTree(_)
            | Error::Topology(_)
            | Error::DimensionMismatch { .. } => 2,
            Error::BudgetExceeded { .. } | Error::InsufficientPeriod { .. } => 3,
            Error::PerronNonConvergence { .. }
            | Error::NotAtEquilibrium { .. }
            | Error::BracketFailure { .. }
            | Error::NotPositiveDefinite
            | Error::Calibration { .. }
            | Error::Internal(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
