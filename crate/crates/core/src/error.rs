use std::path::PathBuf;

/// Errors raised by graph ingestion, stimulation and ring operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no atom records found in {0}")]
    NoAtoms(PathBuf),
    #[error("records-only bond mode requested but {0} has no connectivity records")]
    NoConnectivity(PathBuf),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("configuration has {actual} nodes, graph has {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("node {node} out of range for graph with {nodes} nodes")]
    NodeOutOfRange { node: usize, nodes: usize },
    #[error("ratio {rho} must lie in (0, 1]")]
    InvalidRatio { rho: f64 },
    #[error("ratio {rho} selects no nodes out of {nodes}")]
    EmptyStimulation { rho: f64, nodes: usize },
    #[error("invalid excitation rule: {0}")]
    InvalidRule(String),
    #[error("invalid restimulation schedule: {0}")]
    InvalidSchedule(String),
    #[error("ring is occupied: not all ring nodes are resting")]
    RingOccupied,
    #[error("ring does not carry a single travelling wave")]
    RingNotSingleWave,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
