//! Discrete-event simulation of the loss and infinite-buffer group-server
//! queues.
//!
//! Dynamics at a glance:
//!
//! * Loss model: an arrival takes an idle server of the leftmost group with
//!   one. At a sleeping group it is held without service; when the group
//!   holds `K` customers it wakes and all of them start service. Customers
//!   held at the rightmost sleeping group move to the leftmost group with
//!   free servers whenever such a group lies to its left.
//! * Buffer model: arrivals wait in a FIFO buffer unless a work-on server
//!   is idle. A sleeping group wakes once the buffer holds `K` customers and
//!   every group to its left is full; it then takes up to `m` customers from
//!   the buffer head. Waiting customers abandon at rate `theta`.
//! * Both: a work-on group serving fewer than `max(L, 1)` customers sleeps at
//!   once. In the loss model its customers stay as holders; in the buffer
//!   model they return to the buffer head, oldest first. The
//!   [`ResidualPolicy`](crate::ResidualPolicy) decides whether received
//!   service survives the interruption.
//!
//! After every event the state is settled by applying the sleep rule, then
//! transfers, then the wake rule, until a fixed point.

mod engine;
pub mod event;
mod replicate;
mod report;
pub mod trajectory;

use thiserror::Error;

use crate::model::ValidationReport;

pub use engine::{simulate, simulate_buffer, simulate_loss, GroupMode};
pub use replicate::run_replications;
pub use report::{metric_names, MetricEstimate, SimReport};
pub use trajectory::{trace_to_csv, PowerTrajectory, TraceRow};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration:\n{0}")]
    InvalidConfig(ValidationReport),
    #[error("{0}")]
    WrongModel(&'static str),
    #[error("invalid run options: {0}")]
    InvalidOptions(String),
    #[error("need >= 2 replications for confidence intervals (got {0})")]
    TooFewReplications(usize),
}

/// Run length, observation window and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub horizon: f64,
    /// Statistics are collected on `[warmup, horizon)`.
    pub warmup: f64,
    pub seed: u64,
    pub record_power: bool,
    pub record_trace: bool,
}

impl RunOptions {
    /// Warmup defaults to 10% of the horizon.
    pub fn new(horizon: f64, seed: u64) -> Self {
        Self {
            horizon,
            warmup: 0.1 * horizon,
            seed,
            record_power: false,
            record_trace: false,
        }
    }

    pub fn with_warmup(mut self, warmup: f64) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn with_power(mut self) -> Self {
        self.record_power = true;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub stats: RunStats,
    /// Present when [`RunOptions::record_power`] is set.
    pub power: Option<PowerTrajectory>,
    /// Present when [`RunOptions::record_trace`] is set.
    pub trace: Option<Vec<TraceRow>>,
}

impl RunOutcome {
    /// Cumulative power curve `Phi(t)` of the run.
    pub fn power_trajectory(&self) -> Option<&PowerTrajectory> {
        self.power.as_ref()
    }
}

/// Statistics of a single run.
///
/// Time averages and the window counters cover `[warmup, horizon)`;
/// customer counters count departures (and arrivals, losses) whose event
/// time falls in the window. The `total_*` counters cover the whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub loss_model: bool,
    pub window: f64,
    pub mean_system_count: f64,
    pub mean_group_count: Vec<f64>,
    pub mean_buffer_count: f64,
    /// Customers held at sleeping servers (loss model).
    pub mean_held_count: f64,
    pub mean_power_rate: f64,
    pub arrivals: u64,
    pub losses: u64,
    pub completions: u64,
    pub abandonments: u64,
    /// Arrival-to-completion time, summed over completions.
    pub sojourn_sum: f64,
    /// Time in service, summed over completions.
    pub service_sum: f64,
    /// Time in system, summed over completions and abandonments.
    pub departed_time_sum: f64,
    pub total_arrivals: u64,
    pub total_losses: u64,
    pub total_completions: u64,
    pub total_abandonments: u64,
    pub in_system_at_end: u64,
    pub events: u64,
}

impl RunStats {
    pub fn loss_probability(&self) -> f64 {
        ratio(self.losses, self.arrivals)
    }

    pub fn abandonment_fraction(&self) -> f64 {
        ratio(self.abandonments, self.arrivals)
    }

    pub fn mean_sojourn(&self) -> f64 {
        self.sojourn_sum / self.completions as f64
    }

    pub fn mean_virtual_service(&self) -> f64 {
        self.service_sum / self.completions as f64
    }

    /// Departures (completions and abandonments) per unit time.
    pub fn throughput(&self) -> f64 {
        (self.completions + self.abandonments) as f64 / self.window
    }

    /// Mean time in system over all departures.
    pub fn mean_time_in_system(&self) -> f64 {
        self.departed_time_sum / (self.completions + self.abandonments) as f64
    }

    /// `arrivals = completions + losses + abandonments + in system` over the
    /// whole run.
    pub fn conserves_customers(&self) -> bool {
        self.total_arrivals
            == self.total_completions + self.total_losses + self.total_abandonments + self.in_system_at_end
    }

    /// Relative gap between the time-average count and
    /// throughput x mean time in system.
    pub fn little_law_gap(&self) -> f64 {
        let rhs = self.throughput() * self.mean_time_in_system();
        (self.mean_system_count - rhs).abs() / self.mean_system_count
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
