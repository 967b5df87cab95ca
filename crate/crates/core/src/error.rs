//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A model, stepper or eigenproblem parameter failed validation.
    #[error("{0}")]
    InvalidParameter(String),

    /// A reaction term was evaluated at a negative virus concentration.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),

    /// The equilibrium quadratic has no positive root (R0 <= 1).
    #[error("no positive root: basic reproduction number is {r0} (needs > 1)")]
    NoPositiveRoot { r0: f64 },

    /// `k b m <= q c`, so the constant steady state does not exist.
    #[error("threshold violated: k*b*m = {lhs} must exceed q*c = {rhs}")]
    ThresholdViolated { lhs: f64, rhs: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("front collapse at t = {t}: width {width}")]
    FrontCollapse { t: f64, width: f64 },

    #[error("step rejected at t = {t}: {reason}")]
    StepRejected { t: f64, reason: String },

    #[error("no convergence after {iterations} iterations: {reason}")]
    NonConvergence { iterations: usize, reason: String },

    #[error("iteration failure: {0}")]
    IterationFailure(String),

    #[error("invalid bracket: {0}")]
    BracketInvalid(String),

    #[error("monotonicity violation: {0}")]
    MonotonicityViolation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad input rather than by a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::InvalidInitialData(_)
                | Error::Config(_)
                | Error::Domain(_)
                | Error::NoPositiveRoot { .. }
                | Error::ThresholdViolated { .. }
                | Error::PreconditionViolated(_)
                | Error::NotApplicable(_)
                | Error::BracketInvalid(_)
                | Error::Io(_)
        )
    }

    /// Machine-readable kind used in the structured error object.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Domain(_) => "domain",
            Error::InvalidInitialData(_) => "invalid_initial_data",
            Error::NoPositiveRoot { .. } => "no_positive_root",
            Error::ThresholdViolated { .. } => "threshold_violated",
            Error::PreconditionViolated(_) => "precondition_violated",
            Error::NotApplicable(_) => "not_applicable",
            Error::FrontCollapse { .. } => "front_collapse",
            Error::StepRejected { .. } => "step_rejected",
            Error::NonConvergence { .. } => "non_convergence",
            Error::IterationFailure(_) => "iteration_failure",
            Error::BracketInvalid(_) => "bracket_invalid",
            Error::MonotonicityViolation(_) => "monotonicity_violation",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
