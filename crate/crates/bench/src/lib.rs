//! Shared fixtures for the benchmarks.

use gsq_core::qbd::{build_generator, reward_vector, stationary_distribution, QbdModel, RewardVector};
use gsq_core::{BufferPolicy, QbdParams, SystemConfig};

/// Three-group reference system at arrival rate 30.
pub fn reference_loss() -> SystemConfig {
    SystemConfig::three_group_reference(30.0, BufferPolicy::Loss)
}

pub fn reference_buffer() -> SystemConfig {
    SystemConfig::three_group_reference(30.0, BufferPolicy::InfiniteWithImpatience { theta: 1.0 })
}

/// Two-group analytic instance with `m` switchable servers, `K = m / 2`.
pub fn analytic_config(m: u32) -> SystemConfig {
    SystemConfig::two_group_unilateral(4, m, (m / 2).max(1), 10.0, 5.0, 4.0, 1.0, 1.0, 0.2)
}

/// Generator, reward vector and stationary distribution of [`analytic_config`].
pub fn analytic_model(m: u32) -> (QbdModel, RewardVector, Vec<f64>) {
    let (params, rates) = QbdParams::from_config(&analytic_config(m)).expect("supported");
    let model = build_generator(&params).expect("valid");
    let f = reward_vector(&model.space, &rates).expect("valid rates");
    let pi = stationary_distribution(&model.generator).expect("solvable");
    (model, f, pi)
}
