use std::fmt;

use super::{BufferPolicy, SystemConfig};

/// One broken invariant. `location` is `arrival`, `buffer`, `system` or
/// `group N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            location: location.into(),
            message: message.into(),
        });
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every structural invariant of `config`. Never fails; the
/// violations are the result.
pub fn validate(config: &SystemConfig) -> ValidationReport {
    let mut report = ValidationReport::default();

    for msg in config.arrival.violations() {
        report.push("arrival", msg);
    }

    if config.groups.len() < 2 {
        report.push(
            "system",
            format!(
                "at least 2 groups are required (group 0 plus one switchable group), got {}",
                config.groups.len()
            ),
        );
    }

    for (j, g) in config.groups.iter().enumerate() {
        let loc = format!("group {j}");
        for msg in g.service.violations() {
            report.push(loc.clone(), format!("service {msg}"));
        }
        if g.size == 0 {
            report.push(loc.clone(), format!("m must be positive in group {j}"));
        }
        if !(g.power_work.is_finite() && g.power_work >= 0.0) {
            report.push(loc.clone(), format!("power_work must be nonnegative in group {j}"));
        }
        if j == 0 {
            if g.power_sleep != 0.0 {
                report.push(loc.clone(), "power_sleep must be 0 in group 0");
            }
            if g.thresholds != super::ThresholdPair::NONE {
                report.push(loc.clone(), "group 0 has no thresholds");
            }
            continue;
        }
        let th = g.thresholds;
        if th.wake_at == 0 {
            report.push(loc.clone(), format!("K must be positive in group {j}"));
        }
        if th.sleep_below > th.wake_at {
            report.push(loc.clone(), format!("L exceeds K in group {j}"));
        }
        if th.wake_at > g.size {
            report.push(loc.clone(), format!("K exceeds m in group {j}"));
        }
        if !(g.power_sleep.is_finite() && g.power_sleep > 0.0) {
            report.push(loc.clone(), format!("power_sleep must be > 0 in group {j}"));
        }
        if g.power_sleep >= g.power_work {
            report.push(loc.clone(), format!("power_sleep must be < power_work in group {j}"));
        }
    }

    if let BufferPolicy::InfiniteWithImpatience { theta } = config.buffer {
        if !(theta.is_finite() && theta >= 0.0) {
            report.push("buffer", format!("theta must be a nonnegative finite number (got {theta})"));
        } else if theta == 0.0 {
            if let Some(g0) = config.groups.first() {
                let capacity = f64::from(g0.size) * g0.service.rate();
                let lambda = config.arrival.rate();
                if lambda >= capacity || lambda.is_nan() {
                    report.push(
                        "buffer",
                        format!(
                            "theta = 0 requires arrival rate {lambda} < m0*mu0 = {capacity} \
                             (potentially unstable)"
                        ),
                    );
                }
            }
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ServiceDistribution, ThresholdPair};

    fn reference() -> SystemConfig {
        SystemConfig::three_group_reference(30.0, BufferPolicy::Loss)
    }

    #[test]
    fn reference_system_is_valid() {
        let r = validate(&reference());
        assert!(r.is_ok(), "{r}");
    }

    #[test]
    fn threshold_order() {
        let mut cfg = reference();
        cfg.groups[1].thresholds = ThresholdPair::new(3, 2);
        let r = validate(&cfg);
        assert!(r.mentions("L exceeds K in group 1"), "{r}");
        assert_eq!(r.violations.len(), 1);
    }

    #[test]
    fn sleep_power_must_be_strictly_lower() {
        let mut cfg = reference();
        cfg.groups[1].power_sleep = cfg.groups[1].power_work;
        let r = validate(&cfg);
        assert!(r.mentions("power_sleep must be < power_work in group 1"), "{r}");
    }

    #[test]
    fn collects_every_violation() {
        let mut cfg = reference();
        cfg.groups[2].thresholds = ThresholdPair::new(5, 4);
        cfg.groups[2].power_sleep = 0.0;
        cfg.groups[0].power_sleep = 1.0;
        cfg.arrival = ServiceDistribution::exponential(-1.0);
        let r = validate(&cfg);
        assert!(r.mentions("L exceeds K in group 2"));
        assert!(r.mentions("K exceeds m in group 2"));
        assert!(r.mentions("power_sleep must be > 0 in group 2"));
        assert!(r.mentions("power_sleep must be 0 in group 0"));
        assert!(r.mentions("rate must be a positive"));
    }

    #[test]
    fn single_group_is_rejected() {
        let mut cfg = reference();
        cfg.groups.truncate(1);
        assert!(validate(&cfg).mentions("at least 2 groups"));
        cfg.groups.clear();
        assert!(!validate(&cfg).is_ok());
    }

    #[test]
    fn stability_guard_for_patient_customers() {
        let cfg = reference().with_buffer(BufferPolicy::InfiniteWithImpatience { theta: 0.0 });
        // lambda = 30 >= m0 * mu0 = 20
        assert!(validate(&cfg).mentions("potentially unstable"));
        assert!(validate(&cfg.with_arrival_rate(19.0)).is_ok());
        let cfg = reference().with_buffer(BufferPolicy::InfiniteWithImpatience { theta: 1.0 });
        assert!(validate(&cfg).is_ok());
    }

    #[test]
    fn idempotent() {
        let mut cfg = reference();
        cfg.groups[1].thresholds = ThresholdPair::new(4, 1);
        assert_eq!(validate(&cfg), validate(&cfg));
    }
}
