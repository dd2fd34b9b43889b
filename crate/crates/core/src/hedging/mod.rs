//! Monte Carlo GKW decomposition `X = E[X] + ∫H dS + ε_T` with signature features.

mod design;
mod gkw;
mod kappa;
mod payoff;
mod scan;

pub use design::{assemble_design, build_design, path_features, Design, HedgeBasis, PathFeatures, StaticStrikes};
pub use gkw::{gkw_project, gkw_project_with_remainder, GKWResult};
pub use kappa::kappa_tail;
pub use payoff::Payoff;
pub use scan::{depth_scan, run_hedge, shuffle_gram_check, simulate_features, ScanRow, ShuffleGramEntry};

use crate::sde::SdeError;
use crate::tensor::TensorError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HedgeError {
    #[error("unknown payoff: {0}")]
    UnknownPayoff(String),
    #[error("weight tail is not square-summable: {0}")]
    NotSummable(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("signature truncation {have} is below the required level {need}")]
    Truncation { need: usize, have: usize },
    #[error("invalid hedge basis: {0}")]
    InvalidBasis(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("singular Gram system; offending columns: {}", words.join(" "))]
    Degenerate { words: Vec<String> },
    #[error(transparent)]
    Sde(#[from] SdeError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}
