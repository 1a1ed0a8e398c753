use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no real root found (internal error)")]
    NoRealRoot,
    #[error("base point {0:?} lies on the discriminant")]
    OnDiscriminant(Vec<f64>),
    #[error("quadrature did not converge within {0} subintervals")]
    QuadratureFailure(usize),
    #[error("integration failed: {0}")]
    IntegrationFailure(String),
    #[error("event not found before |t| = {0}")]
    EventNotFound(f64),
    #[error("shooting diverged after {iterations} iterations (residual {residual:.3e})")]
    ShootingDiverged { iterations: usize, residual: f64 },
    #[error("stencil or path straddles an Arg branch cut")]
    BranchCrossing,
    #[error("insufficient samples for a fit ({0})")]
    InsufficientSamples(String),
    #[error("return map is not integral (residual {0:.3e})")]
    NonIntegerMonodromy(f64),
    #[error("Moser denominator vanishes at b = {b:?}, t = {t}")]
    DenominatorVanishes { b: Vec<f64>, t: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl Error {
    /// Short machine-readable class name, used by the CLI error JSON.
    pub fn class(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::NoRealRoot => "NoRealRoot",
            Error::OnDiscriminant(_) => "OnDiscriminant",
            Error::QuadratureFailure(_) => "QuadratureFailure",
            Error::IntegrationFailure(_) => "IntegrationFailure",
            Error::EventNotFound(_) => "EventNotFound",
            Error::ShootingDiverged { .. } => "ShootingDiverged",
            Error::BranchCrossing => "BranchCrossing",
            Error::InsufficientSamples(_) => "InsufficientSamples",
            Error::NonIntegerMonodromy(_) => "NonIntegerMonodromy",
            Error::DenominatorVanishes { .. } => "DenominatorVanishes",
            Error::Eval(_) => "EvalError",
            Error::Parse(_) => "ParseError",
        }
    }
}
