//! Matrix-analytic treatment of the two-group loss queue with unilateral
//! control (`L1 = 0`): the level/phase state space, the block-tridiagonal
//! generator, its stationary distribution, the power reward vector and
//! first-passage moments of cumulative power.
//!
//! Levels are indexed by the number of customers at group 1. Level 0 holds
//! `(W,i;S,0)` for `i = 0..=n`. Levels `1..K` hold the single sleep phase
//! `(W,n;S,j)` followed by `(W,i;W,j)` for `i = n` down to `0`. Levels
//! `K..=m` hold only the work-on phases, again from `i = n` down to `0`.

mod gamma;
mod generator;
mod reward;
mod states;
mod stationary;

use thiserror::Error;

use crate::model::{BufferPolicy, SystemConfig};

pub use gamma::{
    gamma_moment, gamma_moment_taylor, gamma_moments, series_matrix, GammaMoment, GammaOptions,
};
pub use generator::{build_generator, QbdModel};
pub use reward::{expected_power_rate, reward_vector, PowerRates, RewardVector};
pub use states::{enumerate_states, QbdState, StateSpace};
pub use stationary::{loss_probability, stationary_distribution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QbdError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("analytic module supports only the two-group exponential loss model with L1 = 0: {0}")]
    UnsupportedModel(String),
    #[error("invalid power rates: {0}")]
    PowerOrdering(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("linear solve failed: residual {residual:e}")]
    Singular { residual: f64 },
    #[error("reward vector has a zero entry at state {0}; diag(f) is not invertible")]
    NonInvertibleReward(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("series did not converge after {terms} terms (partial value {partial}, last term {last_term:e})")]
    NotConverged {
        partial: f64,
        terms: usize,
        last_term: f64,
    },
}

/// Parameters of the two-group loss queue: `n` base servers, `m`
/// switchable servers with wake threshold `k`, Poisson arrivals at
/// `lambda`, exponential service at `mu0` and `mu1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QbdParams {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub lambda: f64,
    pub mu0: f64,
    pub mu1: f64,
}

impl QbdParams {
    pub fn new(n: usize, m: usize, k: usize, lambda: f64, mu0: f64, mu1: f64) -> Self {
        Self {
            n,
            m,
            k,
            lambda,
            mu0,
            mu1,
        }
    }

    pub fn check(&self) -> Result<(), QbdError> {
        if self.n < 1 {
            return Err(QbdError::InvalidParameters("n must be at least 1".into()));
        }
        if !(1 <= self.k && self.k <= self.m) {
            return Err(QbdError::InvalidParameters(format!(
                "need 1 <= K <= m (K = {}, m = {})",
                self.k, self.m
            )));
        }
        for (name, v) in [("lambda", self.lambda), ("mu0", self.mu0), ("mu1", self.mu1)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(QbdError::InvalidParameters(format!("{name} must be positive (got {v})")));
            }
        }
        Ok(())
    }

    /// Extracts the analytic parameters and power rates from a
    /// configuration, rejecting anything outside the supported model.
    pub fn from_config(cfg: &SystemConfig) -> Result<(Self, PowerRates), QbdError> {
        let unsupported = |why: String| Err(QbdError::UnsupportedModel(why));
        if cfg.groups.len() != 2 {
            return unsupported(format!(
                "need exactly one switchable group, got {}",
                cfg.switchable_groups()
            ));
        }
        if cfg.buffer != BufferPolicy::Loss {
            return unsupported("buffer must be loss".into());
        }
        let Some(lambda) = cfg.arrival.exponential_rate() else {
            return unsupported("arrivals must be exponential".into());
        };
        let (g0, g1) = (&cfg.groups[0], &cfg.groups[1]);
        let (Some(mu0), Some(mu1)) = (g0.service.exponential_rate(), g1.service.exponential_rate())
        else {
            return unsupported("service times must be exponential".into());
        };
        if g1.thresholds.sleep_below != 0 {
            return unsupported(format!("L1 must be 0 (got {})", g1.thresholds.sleep_below));
        }
        let params = Self::new(
            g0.size as usize,
            g1.size as usize,
            g1.thresholds.wake_at as usize,
            lambda,
            mu0,
            mu1,
        );
        params.check()?;
        let rates = PowerRates {
            work0: g0.power_work,
            work1: g1.power_work,
            sleep1: g1.power_sleep,
        };
        Ok((params, rates))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ServiceDistribution, ThresholdPair};

    fn cfg() -> SystemConfig {
        SystemConfig::two_group_unilateral(4, 4, 3, 10.0, 5.0, 4.0, 1.0, 1.0, 0.2)
    }

    #[test]
    fn accepts_special_model() {
        let (p, r) = QbdParams::from_config(&cfg()).unwrap();
        assert_eq!(p, QbdParams::new(4, 4, 3, 10.0, 5.0, 4.0));
        assert_eq!(r.sleep1, 0.2);
    }

    #[test]
    fn rejects_everything_else() {
        let three = SystemConfig::three_group_reference(20.0, BufferPolicy::Loss);
        assert!(matches!(QbdParams::from_config(&three), Err(QbdError::UnsupportedModel(_))));

        let mut c = cfg();
        c.groups[1].thresholds = ThresholdPair::new(1, 3);
        assert!(matches!(QbdParams::from_config(&c), Err(QbdError::UnsupportedModel(_))));

        let mut c = cfg();
        c.groups[0].service = ServiceDistribution::erlang(2, 10.0);
        assert!(matches!(QbdParams::from_config(&c), Err(QbdError::UnsupportedModel(_))));

        let c = cfg().with_buffer(BufferPolicy::InfiniteWithImpatience { theta: 1.0 });
        assert!(matches!(QbdParams::from_config(&c), Err(QbdError::UnsupportedModel(_))));
    }

    #[test]
    fn parameter_domain() {
        assert!(QbdParams::new(0, 1, 1, 1.0, 1.0, 1.0).check().is_err());
        assert!(QbdParams::new(1, 2, 3, 1.0, 1.0, 1.0).check().is_err());
        assert!(QbdParams::new(1, 2, 0, 1.0, 1.0, 1.0).check().is_err());
        assert!(QbdParams::new(1, 2, 2, 0.0, 1.0, 1.0).check().is_err());
        assert!(QbdParams::new(1, 2, 2, 1.0, 1.0, 1.0).check().is_ok());
    }
}
