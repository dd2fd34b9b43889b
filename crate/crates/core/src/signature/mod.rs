//! Brownian path generation and piecewise-linear (Wong–Zakai) signatures.

mod cache;
mod dense;
mod path;
mod rng;

pub use cache::PathCache;
pub use dense::{DenseLayout, Scratch};
pub use path::{
    moment_bound, segment_exponential, signature_piecewise_linear, terminal_signature,
    wong_zakai_signature, PathGrid, Refinement, SignatureStream,
};
pub use rng::{
    brownian_increments, brownian_path, normal_at, path_normals, simulate_brownian_grid,
    uniform_times,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SignatureError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("path cache: {0}")]
    Cache(String),
}
