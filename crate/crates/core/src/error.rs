use thiserror::Error;

/// Failures raised by the integrator itself.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("integration span is empty (t0 == t1)")]
    EmptySpan,
    #[error("initial state is not finite")]
    NonFiniteInitial,
    #[error("state guard violated at the initial point")]
    GuardViolatedAtStart,
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("step budget of {steps} exhausted at t = {t}")]
    BudgetExhausted { steps: usize, t: f64 },
}

/// Errors of the equation-specific modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no oscillation found within the step budget")]
    NoOscillation,
    #[error("inner-layer switch threshold never reached: {0}")]
    SwitchNotReached(String),
    #[error("orbit left the admissible region at u = {u}")]
    LeftRegion { u: f64 },
    #[error("argument {value} outside the tabulated range [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },
    #[error("bound violated: {0}")]
    BoundViolation(String),
    #[error("curve self-intersects between segments {first} and {second}")]
    SelfIntersection { first: usize, second: usize },
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
