use super::ServiceDistribution;

/// Sleep/wake thresholds `(L, K)` of a switchable group.
///
/// The group wakes once `K` customers are available to it and sleeps when
/// fewer than `L` customers are being served. Group 0 carries the
/// degenerate pair `(0, 0)` and never switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdPair {
    pub sleep_below: u32,
    pub wake_at: u32,
}

impl ThresholdPair {
    pub const NONE: ThresholdPair = ThresholdPair {
        sleep_below: 0,
        wake_at: 0,
    };

    pub fn new(sleep_below: u32, wake_at: u32) -> Self {
        Self {
            sleep_below,
            wake_at,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    /// Number of identical servers.
    pub size: u32,
    /// Per-server service time.
    pub service: ServiceDistribution,
    pub thresholds: ThresholdPair,
    /// Power drawn per server while working or idle-on.
    pub power_work: f64,
    /// Power drawn per server while asleep. Always 0 for group 0.
    pub power_sleep: f64,
}

impl GroupSpec {
    /// The always-on base-line group.
    pub fn base(size: u32, service: ServiceDistribution, power_work: f64) -> Self {
        Self {
            size,
            service,
            thresholds: ThresholdPair::NONE,
            power_work,
            power_sleep: 0.0,
        }
    }

    pub fn switchable(
        size: u32,
        service: ServiceDistribution,
        thresholds: ThresholdPair,
        power_work: f64,
        power_sleep: f64,
    ) -> Self {
        Self {
            size,
            service,
            thresholds,
            power_work,
            power_sleep,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BufferPolicy {
    /// No waiting room; arrivals that find no admissible server are lost.
    Loss,
    /// Unbounded FIFO buffer; each waiting customer abandons at rate `theta`.
    InfiniteWithImpatience { theta: f64 },
}

/// What happens to service already received when a customer is pulled out
/// of a group that goes to sleep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualPolicy {
    /// Received service is discarded and a fresh requirement is drawn.
    #[default]
    Restart,
    /// Received service is kept; the customer completes once the accrued
    /// time reaches its original requirement.
    Resume,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Index 0 is the base-line group.
    pub groups: Vec<GroupSpec>,
    /// Interarrival time distribution.
    pub arrival: ServiceDistribution,
    pub buffer: BufferPolicy,
    pub residual: ResidualPolicy,
}

impl SystemConfig {
    /// Number of switchable groups.
    pub fn switchable_groups(&self) -> usize {
        self.groups.len().saturating_sub(1)
    }

    pub fn arrival_rate(&self) -> f64 {
        self.arrival.rate()
    }

    pub fn total_servers(&self) -> u64 {
        self.groups.iter().map(|g| u64::from(g.size)).sum()
    }

    pub fn is_loss(&self) -> bool {
        matches!(self.buffer, BufferPolicy::Loss)
    }

    /// Same system with the arrival stream rescaled to `rate`.
    pub fn with_arrival_rate(&self, rate: f64) -> Self {
        Self {
            arrival: self.arrival.with_rate(rate),
            ..self.clone()
        }
    }

    pub fn with_buffer(&self, buffer: BufferPolicy) -> Self {
        Self {
            buffer,
            ..self.clone()
        }
    }

    /// Power drawn when every switchable group sleeps.
    pub fn idle_power_rate(&self) -> f64 {
        self.groups
            .iter()
            .enumerate()
            .map(|(j, g)| {
                let per_server = if j == 0 { g.power_work } else { g.power_sleep };
                f64::from(g.size) * per_server
            })
            .sum()
    }

    /// Three-group reference system: sizes (4, 4, 3), exponential service
    /// rates (5, 4, 3), thresholds `L = 2`, `K = 3` for both switchable
    /// groups, Poisson arrivals at `arrival_rate`.
    ///
    /// Power rates are illustrative: 1.0 per working server everywhere,
    /// 0.2 and 0.3 per sleeping server in groups 1 and 2.
    pub fn three_group_reference(arrival_rate: f64, buffer: BufferPolicy) -> Self {
        let th = ThresholdPair::new(2, 3);
        Self {
            groups: vec![
                GroupSpec::base(4, ServiceDistribution::exponential(5.0), 1.0),
                GroupSpec::switchable(4, ServiceDistribution::exponential(4.0), th, 1.0, 0.2),
                GroupSpec::switchable(3, ServiceDistribution::exponential(3.0), th, 1.0, 0.3),
            ],
            arrival: ServiceDistribution::exponential(arrival_rate),
            buffer,
            residual: ResidualPolicy::Restart,
        }
    }

    /// Two-group exponential loss system with unilateral control (`L1 = 0`),
    /// the instance family covered by the analytic module.
    #[allow(clippy::too_many_arguments)]
    pub fn two_group_unilateral(
        base_size: u32,
        switch_size: u32,
        wake_at: u32,
        arrival_rate: f64,
        base_rate: f64,
        switch_rate: f64,
        power_work0: f64,
        power_work1: f64,
        power_sleep1: f64,
    ) -> Self {
        Self {
            groups: vec![
                GroupSpec::base(base_size, ServiceDistribution::exponential(base_rate), power_work0),
                GroupSpec::switchable(
                    switch_size,
                    ServiceDistribution::exponential(switch_rate),
                    ThresholdPair::new(0, wake_at),
                    power_work1,
                    power_sleep1,
                ),
            ],
            arrival: ServiceDistribution::exponential(arrival_rate),
            buffer: BufferPolicy::Loss,
            residual: ResidualPolicy::Restart,
        }
    }
}
