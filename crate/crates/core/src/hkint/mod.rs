//! Gauge integration: gauges, tagged partitions, the Cousin construction,
//! Riemann sums, an adaptive integrator and the Alexiewicz norm.

pub mod gauge;
pub mod integrate;
pub mod partition;

use thiserror::Error;

use crate::funcspec::EvalError;

pub use gauge::Gauge;
pub use integrate::{alexiewicz_norm, hk_integrate, hk_integrate_with, Composed, HkOptions, Integrand, IntegralResult};
pub use partition::{cousin_partition, is_delta_fine, riemann_sum, TaggedCell, TaggedPartition};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HkError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("depth budget exhausted: {0}")]
    DepthBudget(String),
    #[error("no convergence after {cells} cells (last two sums {last_sums:?})")]
    NotConverged { cells: usize, last_sums: Option<(f64, f64)> },
}
