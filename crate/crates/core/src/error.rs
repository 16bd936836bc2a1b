use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("side information of {has} files leaves nothing to request out of {files}")]
    NoFileToRequest { has: usize, files: usize },

    #[error("user {user} is co-located with transmitter {transmitter}")]
    CoLocated { user: usize, transmitter: usize },

    #[error("placement does not match scenario: {0}")]
    PlacementMismatch(String),

    #[error("graph has {vertices} vertices, exact solver limit is {limit}")]
    CliqueSizeLimit { vertices: usize, limit: usize },

    #[error("invalid clique: {0}")]
    InvalidClique(String),

    #[error("transmitter {transmitter} has no targeted users")]
    EmptyTargetSet { transmitter: usize },

    #[error("invalid experiment config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
