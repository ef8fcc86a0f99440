use thiserror::Error;

use crate::solver::DistributionField;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why a time integration stopped early.
#[derive(Debug)]
pub struct Abort {
    pub time: f64,
    pub reason: String,
    /// State before the failing step, when one is available.
    pub last_good: Option<DistributionField>,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("supercritical mass: M = {mass} >= M_crit = {critical} (condensate states are not supported)")]
    SupercriticalMass { mass: f64, critical: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("numerical abort at t = {}: {}", .0.time, .0.reason)]
    Abort(Box<Abort>),

    #[error("infeasible coefficients: constraint {index} violated ({description})")]
    Infeasible { index: usize, description: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn abort(time: f64, reason: impl Into<String>, last_good: Option<DistributionField>) -> Self {
        Error::Abort(Box::new(Abort {
            time,
            reason: reason.into(),
            last_good,
        }))
    }

    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::Domain(_)
            | Error::SupercriticalMass { .. }
            | Error::GridMismatch(_)
            | Error::Config(_)
            | Error::Parse(_) => 2,
            Error::Infeasible { .. } => 4,
            Error::RootFinding(_)
            | Error::Quadrature(_)
            | Error::Eigen(_)
            | Error::Abort(_) => 3,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse(format!("{other:?}")),
        }
    }
}
