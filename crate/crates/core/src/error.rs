use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),
    #[error("no neighbor found for point {index} (scale parameter too small?)")]
    EmptyNeighborhood { index: usize },
    #[error("invalid neighbor parameters: {0}")]
    InvalidParams(String),
    #[error("barycentric normalization degenerate: y^T 1 = {value}")]
    DegenerateNormalization { value: f64 },
    #[error("eigenvectors required but not computed for this spectrum")]
    MissingEigenvectors,
    #[error("all leading eigenvalues vanish; cloud is degenerate")]
    DegenerateSpectrum,
    #[error("linear solve failed: {0}")]
    SolveFailure(String),
    #[error("eigensolver failed: {0}")]
    EigenFailure(String),
    #[error("proximity graph stayed disconnected after {attempts} radius increases")]
    DisconnectedGraph { attempts: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
