//! Truncated generator / carré-du-champ tables, the Riccati vector field, an
//! explosion-detecting integrator and exponential-affine transform values.

mod flow;
mod generator;

pub use flow::{
    integrate_flow, integrate_ode, projection_compatibility, riccati_rhs, scalar_explosion_bound,
    transform_value, write_transform_csv, ExplosionReason, FlowConfig, FlowOutcome,
};
pub use generator::{build_generator, Coord, Extension, GeneratorTable, RiccatiState};

use crate::tensor::TensorError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RiccatiError {
    #[error("truncation window violated: need N >= {need}, have {have}")]
    Window { need: usize, have: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("flow exploded at tau = {t_star} (norm {norm})")]
    Exploded { t_star: f64, norm: f64 },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}
