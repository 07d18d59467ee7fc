use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("component {component}: dimension mismatch: {detail}")]
    DimensionMismatch { component: usize, detail: String },

    #[error("component {component}: box is unbounded or not finite")]
    UnboundedBox { component: usize },

    #[error("component {component}: lower bound exceeds upper bound at coordinate {coordinate}")]
    EmptyBox { component: usize, coordinate: usize },

    #[error("component {component}: prox scale must be positive, got {rho}")]
    NonpositiveProxScale { component: usize, rho: f64 },

    #[error("component {component}: coupling block is identically zero")]
    ZeroBlock { component: usize },

    #[error("component {component}: invalid objective: {detail}")]
    InvalidObjective { component: usize, detail: String },

    #[error("problem has no components")]
    EmptyProblem,

    #[error("objective domain violation: {0}")]
    Domain(String),

    #[error("power iteration did not converge after {iterations} iterations (last estimate {estimate})")]
    PowerIteration { estimate: f64, iterations: usize },

    #[error("component {component}: objective not strongly convex")]
    NotStronglyConvex { component: usize },

    #[error("component {component}: gradient mapping requested on a nonsmooth objective")]
    NonsmoothComponent { component: usize },

    #[error(
        "inner solve{} failed: achieved accuracy {achieved:e} after {iterations} iterations",
        component.map(|c| format!(" (component {c})")).unwrap_or_default()
    )]
    InnerSolve {
        component: Option<usize>,
        achieved: f64,
        iterations: usize,
        best: Vec<f64>,
    },

    #[error("iteration {iteration}: schedule condition violated: {lhs:e} < {rhs:e} ({rule})")]
    Schedule {
        iteration: usize,
        rule: &'static str,
        lhs: f64,
        rhs: f64,
    },

    #[error("iteration {iteration}: excessive gap violated: f(x;beta2) = {primal:.17e} > {dual:.17e} + slack {slack:e}")]
    Invariant {
        iteration: usize,
        primal: f64,
        dual: f64,
        slack: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("problem is infeasible: {0}")]
    Infeasible(String),

    #[error("reference solve failed: {0}")]
    Reference(String),

    #[error("invalid problem document: {0}")]
    Document(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attaches a component index to an inner-solver failure.
    pub(crate) fn at_component(self, index: usize) -> Self {
        match self {
            Error::InnerSolve {
                achieved,
                iterations,
                best,
                ..
            } => Error::InnerSolve {
                component: Some(index),
                achieved,
                iterations,
                best,
            },
            other => other,
        }
    }
}
