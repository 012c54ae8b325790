use alloc::string::String;

/// Errors raised by operators, solvers and the lower-bound machinery.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("a point must have positive dimension")]
    EmptyPoint,

    #[error("non-finite input coordinate at index {index}")]
    NonFiniteInput { index: usize },

    #[error("{solver}: non-finite iterate at iteration {iteration}")]
    NonFinite {
        solver: &'static str,
        iteration: usize,
    },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("schedule overflow: gamma^(2N) reaches 1e300 for gamma = {gamma}, N = {horizon}")]
    ScheduleOverflow { gamma: f64, horizon: usize },

    #[error("insufficient budget: {budget} resolvent calls given, at least {minimum} required")]
    InsufficientBudget { budget: usize, minimum: usize },

    #[error("metric is not positive semidefinite: <Mv, v> = {value}")]
    NonPsdMetric { value: f64 },

    #[error("scalar root finding did not converge: bracket [{lo}, {hi}] after {iterations} iterations")]
    RootFinding { lo: f64, hi: f64, iterations: usize },

    #[error("trace record {index} carries no residual")]
    MissingResidual { index: usize },

    #[error("trace index {found} does not follow {previous}")]
    NonIncreasingIndex { previous: usize, found: usize },

    #[error("algorithm is not deterministic: query {step} changed between evaluations")]
    Nondeterministic { step: usize },

    #[error("ambient dimension {dim} is too small, need at least {required}")]
    DimensionTooSmall { dim: usize, required: usize },

    #[error("budget {budget} is below the asymptotic regime of the restart bound")]
    BelowAsymptoticRegime { budget: usize },

    #[error("residual is zero at iteration {iteration}: trace converged, log-slope undefined")]
    ZeroResidual { iteration: usize },

    #[error("rate fit needs at least two records with k >= 1 in the window, found {found}")]
    WindowTooSmall { found: usize },

    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn require(cond: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}
