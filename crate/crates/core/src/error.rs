//! Shared error type for every fallible operation in the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A matrix that must be invertible (or a system that must be solvable) is
    /// numerically singular at the documented tolerance.
    #[error("singular system: {0}")]
    Singular(String),

    /// A quadratic program has no feasible point.
    #[error("infeasible QP: {0}")]
    QpInfeasible(String),

    /// The receding-horizon planner could not produce a feasible plan from the
    /// current state.
    #[error("planner infeasible at step {step}: {message}")]
    PlannerInfeasible { step: usize, message: String },

    /// The Lyapunov-constrained program admits no decrease direction.
    #[error("stabilizing constraint infeasible: {0}")]
    ClfInfeasible(String),

    /// The barrier-constrained program admits no safe input.
    #[error("barrier constraint infeasible: {0}")]
    CbfInfeasible(String),

    /// Objective decreases without bound on the feasible set.
    #[error("unbounded objective: {0}")]
    Unbounded(String),

    /// Arguments outside an operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A grid action that would leave the grid.
    #[error("inadmissible action {action} from cell ({x}, {y})")]
    InadmissibleAction { action: String, x: usize, y: usize },

    /// Graph search exhausted the grid without reaching the target set.
    #[error("no plan: {0}")]
    NoPlan(String),

    /// Recorded data are not informative enough to identify the predictor.
    #[error("insufficient excitation: {0}")]
    Excitation(String),

    /// A claimed optimality or safety certificate fails its own checks.
    #[error("certificate invalid: {0}")]
    CertificateInvalid(String),

    /// Transfer-function evaluation hit a pole on the evaluation contour.
    #[error("pole on the evaluation axis near omega = {omega}")]
    PoleOnAxis { omega: f64 },

    /// The fragility weight in a robustness trade-off vanished or blew up.
    #[error("singular fragility weight: {0}")]
    SingularFragility(String),

    /// Bad configuration input; names the offending field.
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    /// An iterative method hit its safety cap before converging.
    #[error("iteration limit in {0}")]
    IterationLimit(String),
}

impl Error {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// Process exit code the CLI maps this error to. Config problems exit 2,
    /// runtime failures exit 1 (success is 0).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
