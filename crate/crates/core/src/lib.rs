//! Simulation and exact analysis of group-server queues.
//!
//! A group-server queue partitions its servers into groups. Group 0 is a
//! base-line group whose servers are always working; every other group
//! switches between work-on and sleep as a whole under a bilateral
//! threshold pair `(L, K)`. Two variants are supported:
//!
//! * a loss queue with no waiting room, where customers routed to a sleeping
//!   group are held at its servers until the group wakes, and
//! * an infinite-buffer queue with exponentially impatient customers.
//!
//! [`sim`] contains the discrete-event simulator for both variants,
//! [`qbd`] the matrix-analytic treatment of the two-group loss queue
//! (stationary distribution, power reward, first-passage moments of
//! cumulative power), and [`oracles`] independent reference constructions
//! used to cross-check them.

pub mod model;
pub mod oracles;
pub mod qbd;
pub mod sim;
pub mod stats;

pub use model::{
    parse_config, render_config, validate, BufferPolicy, ConfigError, GroupSpec, ResidualPolicy,
    ServiceDistribution, SystemConfig, ThresholdPair, ValidationReport, Violation,
};
pub use qbd::{PowerRates, QbdError, QbdModel, QbdParams, QbdState, RewardVector};
pub use sim::{run_replications, simulate, RunOptions, RunOutcome, RunStats, SimError, SimReport};
