use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, VecDeque};

use super::OracleError;
use crate::qbd::QbdParams;

const STATE_LIMIT: usize = 100_000;

/// `(busy servers in group 0, group 1 awake, customers at group 1)`.
pub type OracleState = (usize, bool, usize);

/// A CTMC stored as an explicit state list and a full rate matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseCtmc {
    pub states: Vec<OracleState>,
    /// `rates[a][b]` for `a != b`; diagonal holds minus the row total.
    pub rates: Vec<Vec<f64>>,
}

/// Applies the instantaneous rules to a state reached by one event:
/// an awake group with no customers sleeps, held customers move to free
/// group-0 servers, and a sleeping group holding `K` customers wakes.
fn settle(mut s: OracleState, p: &QbdParams) -> OracleState {
    loop {
        let before = s;
        let (busy0, awake, count1) = s;
        if awake && count1 == 0 {
            s = (busy0, false, 0);
        } else if !awake && count1 > 0 && busy0 < p.n {
            let moved = count1.min(p.n - busy0);
            s = (busy0 + moved, false, count1 - moved);
        } else if !awake && count1 >= p.k {
            s = (busy0, true, count1);
        }
        if s == before {
            return s;
        }
    }
}

fn outgoing(s: OracleState, p: &QbdParams) -> Vec<(f64, OracleState)> {
    let (busy0, awake, count1) = s;
    let mut out = Vec::new();
    // arrival: leftmost group with a free server
    if busy0 < p.n {
        out.push((p.lambda, settle((busy0 + 1, awake, count1), p)));
    } else if count1 < p.m {
        out.push((p.lambda, settle((busy0, awake, count1 + 1), p)));
    }
    if busy0 > 0 {
        out.push((busy0 as f64 * p.mu0, settle((busy0 - 1, awake, count1), p)));
    }
    if awake && count1 > 0 {
        out.push((count1 as f64 * p.mu1, settle((busy0, awake, count1 - 1), p)));
    }
    out
}

/// Breadth-first walk from the empty state, one event at a time.
pub fn brute_force_ctmc(params: &QbdParams) -> Result<DenseCtmc, OracleError> {
    params
        .check()
        .map_err(|e| OracleError::InvalidParameters(e.to_string()))?;
    let start = (0, false, 0);
    let mut index: BTreeMap<OracleState, usize> = BTreeMap::new();
    let mut states = vec![start];
    let mut edges: Vec<Vec<(f64, OracleState)>> = Vec::new();
    index.insert(start, 0);
    let mut frontier = VecDeque::from([start]);
    while let Some(s) = frontier.pop_front() {
        let out = outgoing(s, params);
        for &(_, t) in &out {
            if let Entry::Vacant(slot) = index.entry(t) {
                if states.len() >= STATE_LIMIT {
                    return Err(OracleError::StateExplosion { limit: STATE_LIMIT });
                }
                slot.insert(states.len());
                states.push(t);
                frontier.push_back(t);
            }
        }
        edges.push(out);
    }
    let n = states.len();
    let mut rates = vec![vec![0.0; n]; n];
    for (a, out) in edges.iter().enumerate() {
        for &(rate, t) in out {
            let b = index[&t];
            if a != b {
                rates[a][b] += rate;
                rates[a][a] -= rate;
            }
        }
    }
    Ok(DenseCtmc { states, rates })
}

impl DenseCtmc {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, s: OracleState) -> Option<usize> {
        self.states.iter().position(|&x| x == s)
    }

    /// Stationary distribution by Grassmann-Taksar-Heyman elimination,
    /// which only uses off-diagonal rates and stays nonnegative throughout.
    pub fn stationary(&self) -> Vec<f64> {
        let n = self.len();
        let mut a: Vec<Vec<f64>> = self.rates.clone();
        for k in (1..n).rev() {
            let s: f64 = (0..k).map(|j| a[k][j]).sum();
            for i in 0..k {
                let factor = a[i][k] / s;
                if factor == 0.0 {
                    continue;
                }
                let (head, tail) = a.split_at_mut(k);
                let pivot = &tail[0];
                for (j, v) in head[i].iter_mut().enumerate().take(k) {
                    if i != j {
                        *v += factor * pivot[j];
                    }
                }
            }
        }
        let mut pi = vec![0.0; n];
        pi[0] = 1.0;
        for k in 1..n {
            let s: f64 = (0..k).map(|j| a[k][j]).sum();
            pi[k] = (0..k).map(|i| pi[i] * a[i][k]).sum::<f64>() / s;
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= total);
        pi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, m: usize, k: usize) -> QbdParams {
        QbdParams {
            n,
            m,
            k,
            lambda: 1.0,
            mu0: 1.0,
            mu1: 1.0,
        }
    }

    #[test]
    fn two_server_instance_by_hand() {
        let c = brute_force_ctmc(&params(1, 1, 1)).unwrap();
        let mut states = c.states.clone();
        states.sort();
        assert_eq!(
            states,
            vec![(0, false, 0), (0, true, 1), (1, false, 0), (1, true, 1)]
        );
        // total count is M/M/2/2 with lambda = mu = 1
        let pi = c.stationary();
        let by_count = |total: usize| -> f64 {
            c.states
                .iter()
                .zip(&pi)
                .filter(|((i, _, j), _)| i + j == total)
                .map(|(_, p)| p)
                .sum()
        };
        assert!((by_count(0) - 0.4).abs() < 1e-14);
        assert!((by_count(1) - 0.4).abs() < 1e-14);
        assert!((by_count(2) - 0.2).abs() < 1e-14);
    }

    #[test]
    fn rows_sum_to_zero() {
        let c = brute_force_ctmc(&params(3, 5, 4)).unwrap();
        for row in &c.rates {
            assert!(row.iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn holders_only_when_group0_full() {
        let c = brute_force_ctmc(&params(4, 4, 3)).unwrap();
        for &(i, awake, j) in &c.states {
            if !awake && j > 0 {
                assert_eq!(i, 4);
                assert!(j < 3);
            }
            if awake {
                assert!(j >= 1);
            }
        }
        assert_eq!(c.len(), 27);
    }

    #[test]
    fn gth_on_birth_death() {
        let c = DenseCtmc {
            states: vec![(0, false, 0), (1, false, 0)],
            rates: vec![vec![-1.0, 1.0], vec![2.0, -2.0]],
        };
        let pi = c.stationary();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-15 && (pi[1] - 1.0 / 3.0).abs() < 1e-15);
    }
}
