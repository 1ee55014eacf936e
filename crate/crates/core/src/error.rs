use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::Vec2;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("cell size must be positive, got {0}")]
    InvalidCellSize(f64),

    #[error("cluster {cluster} is infeasible: no free position found after {attempts} attempts")]
    InfeasibleCluster { cluster: usize, attempts: usize },

    #[error("invalid TSP instance: {0}")]
    InvalidInstance(String),

    #[error("no feasible path between cities {from} and {to}")]
    UnreachableCities { from: usize, to: usize },

    #[error("invalid tour: {0}")]
    InvalidTour(String),

    #[error("instance too large for exhaustive search: {interior} interior cities (max {max})")]
    InstanceTooLarge { interior: usize, max: usize },

    #[error("endpoint {0:?} lies in a blocked cell")]
    BlockedEndpoint(Vec2),

    #[error("no path from {start:?} to {goal:?}")]
    NoPath { start: Vec2, goal: Vec2 },

    #[error("sub-goal coincides with the sub-swarm centre, driving direction undefined")]
    CoincidentSubgoal,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse { path: path.into(), message: message.to_string() }
    }
}
