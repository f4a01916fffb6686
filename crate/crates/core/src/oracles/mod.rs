//! Independent reference constructions: a state-space walk for the
//! two-group loss queue, and closed forms for Erlang-B and the M/M/c+M
//! queue. Nothing here reuses the analytic module's transition code.

mod ctmc;
mod erlang;

use thiserror::Error;

pub use ctmc::{brute_force_ctmc, DenseCtmc, OracleState};
pub use erlang::{erlang_a_truncated, erlang_b, erlang_b_sum, mmc_expected_count, ErlangAMetrics};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("state space exceeds {limit} states")]
    StateExplosion { limit: usize },
    #[error("truncation at {level} leaves tail mass {tail_mass:e}")]
    InsufficientTruncation { level: usize, tail_mass: f64 },
}
