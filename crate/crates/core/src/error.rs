use std::path::PathBuf;

use thiserror::Error;

use crate::fusion::FusionResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value {value} encountered at x = {at}")]
    NonFinite { value: f64, at: f64 },

    #[error("evaluation point {x} lies outside the grid [{a}, {b}]")]
    OutsideGrid { x: f64, a: f64, b: f64 },

    #[error("sampled signal evaluated at {x}, outside its sampled range [{lo}, {hi}]")]
    OutsideSamples { x: f64, lo: f64, hi: f64 },

    #[error("polynomial order {order} needs more than {points} points")]
    OrderTooHigh { order: usize, points: usize },

    #[error(
        "design matrix is rank deficient for order {order}: only {distinct} distinct abscissae"
    )]
    RankDeficient { order: usize, distinct: usize },

    #[error("sensor {sensor}: no valid data inside the quality gate")]
    NoValidData { sensor: String },

    #[error("grand mean is zero, relative deviation undefined")]
    ZeroGrandMean,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("sensor {sensor}: fused value is not finite")]
    NonFiniteFused { sensor: String },

    #[error("fusion did not converge within {rounds} rounds (relative spread {spread:.3e})")]
    NotConverged {
        rounds: usize,
        spread: f64,
        last: Box<FusionResult>,
    },

    #[error("no prognosis: {0}")]
    NoPrognosis(String),

    #[error("{component}: {source}")]
    Component {
        component: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}:{line}: {message}")]
    ParseLine {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Broad failure classes, used by the CLI to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numerical,
    NoPrognosis,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_)
            | Error::Parse { .. }
            | Error::ParseLine { .. }
            | Error::Io { .. }
            | Error::Json(_)
            | Error::NoValidData { .. } => ErrorKind::Input,
            Error::NoPrognosis(_) => ErrorKind::NoPrognosis,
            Error::Component { source, .. } => source.kind(),
            _ => ErrorKind::Numerical,
        }
    }

    pub(crate) fn in_component(self, component: &str) -> Error {
        Error::Component {
            component: component.to_string(),
            source: Box::new(self),
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
