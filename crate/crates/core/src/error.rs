use std::path::PathBuf;

use thiserror::Error;

use crate::boxes::BoxError;
use crate::cluster::ClusterError;
use crate::eval::EvalError;
use crate::fog::FogError;
use crate::geom::GeomError;
use crate::lift::LiftError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Top-level error for I/O and pipeline operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Box(#[from] BoxError),
    #[error(transparent)]
    Fog(#[from] FogError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: invalid records:\n{}", .problems.join("\n"))]
    Schema { path: PathBuf, problems: Vec<String> },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
