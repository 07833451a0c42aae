//! Boundary-point detection for point clouds sampled from compact manifolds
//! with boundary, plus the reference baselines, synthetic datasets, spectral
//! embedding, and evaluation utilities used to exercise it.

pub mod baselines;
pub mod bdlle;
pub mod datasets;
pub mod diffusion;
pub mod error;
pub mod eval;
pub mod oracles;
pub mod pointcloud;
pub mod runner;

pub use error::{Error, Result};
pub use pointcloud::{NeighborIndex, NeighborParams, NeighborSet, PointCloud};
