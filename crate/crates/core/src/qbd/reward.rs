use super::{QbdError, StateSpace};

/// Per-server power rates of the two-group model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerRates {
    pub work0: f64,
    pub work1: f64,
    pub sleep1: f64,
}

/// Instantaneous power rate `f` per state, in level order.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardVector {
    pub values: Vec<f64>,
}

impl RewardVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn fill(space: &StateSpace, rates: &PowerRates) -> RewardVector {
    let n = space.n as f64;
    let m = space.m as f64;
    let asleep = n * rates.work0 + m * rates.sleep1;
    let awake = n * rates.work0 + m * rates.work1;
    RewardVector {
        values: space
            .iter()
            .map(|(_, _, s)| if s.group1_awake { awake } else { asleep })
            .collect(),
    }
}

/// `f = n P_W0 + m P_S1` while group 1 sleeps and `n P_W0 + m P_W1` while it
/// works, whatever the occupancy.
pub fn reward_vector(space: &StateSpace, rates: &PowerRates) -> Result<RewardVector, QbdError> {
    if !(rates.work0.is_finite() && rates.work0 >= 0.0) {
        return Err(QbdError::PowerOrdering(format!("P_W0 must be >= 0 (got {})", rates.work0)));
    }
    if !(0.0 < rates.sleep1 && rates.sleep1 < rates.work1 && rates.work1.is_finite()) {
        return Err(QbdError::PowerOrdering(format!(
            "need 0 < P_S1 < P_W1 (got P_S1 = {}, P_W1 = {})",
            rates.sleep1, rates.work1
        )));
    }
    Ok(fill(space, rates))
}

/// `pi f`.
pub fn expected_power_rate(pi: &[f64], f: &RewardVector) -> Result<f64, QbdError> {
    if pi.len() != f.len() {
        return Err(QbdError::DimensionMismatch {
            expected: f.len(),
            got: pi.len(),
        });
    }
    Ok(pi.iter().zip(&f.values).map(|(p, v)| p * v).sum())
}
