use std::fmt;

use super::QbdError;
use crate::sim::GroupMode;

/// `(W, i; l1, j)`: `i` busy servers in group 0, group 1 in mode `l1`
/// with `j` customers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QbdState {
    pub group0_busy: usize,
    pub group1_awake: bool,
    pub group1_count: usize,
}

impl QbdState {
    pub fn new(group0_busy: usize, group1_mode: GroupMode, group1_count: usize) -> Self {
        Self {
            group0_busy,
            group1_awake: group1_mode == GroupMode::WorkOn,
            group1_count,
        }
    }

    pub fn group1_mode(&self) -> GroupMode {
        if self.group1_awake {
            GroupMode::WorkOn
        } else {
            GroupMode::Sleep
        }
    }

    pub fn mode_letter(&self) -> char {
        if self.group1_awake {
            'W'
        } else {
            'S'
        }
    }
}

impl fmt::Display for QbdState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(W,{};{},{})",
            self.group0_busy,
            self.mode_letter(),
            self.group1_count
        )
    }
}

/// States grouped into levels `0..=m`, plus the flat level-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub levels: Vec<Vec<QbdState>>,
    offsets: Vec<usize>,
}

impl StateSpace {
    pub fn len(&self) -> usize {
        *self.offsets.last().expect("nonempty")
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Global index of the first phase of `level`.
    pub fn offset(&self, level: usize) -> usize {
        self.offsets[level]
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// Every state in level-major order, with `(level, phase)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, QbdState)> + '_ {
        self.levels
            .iter()
            .enumerate()
            .flat_map(|(v, lv)| lv.iter().enumerate().map(move |(p, s)| (v, p, *s)))
    }

    /// Phase of the work-on state `(W,i;W,level)`.
    pub(crate) fn work_phase(&self, level: usize, busy0: usize) -> usize {
        debug_assert!(level >= 1 && busy0 <= self.n);
        if level < self.k {
            1 + self.n - busy0
        } else {
            self.n - busy0
        }
    }

    pub fn index_of(&self, s: QbdState) -> Option<usize> {
        let level = s.group1_count;
        if level > self.m || s.group0_busy > self.n {
            return None;
        }
        let phase = match (level, s.group1_awake) {
            (0, false) => s.group0_busy,
            (0, true) => return None,
            (j, false) if j < self.k && s.group0_busy == self.n => 0,
            (_, false) => return None,
            (j, true) => self.work_phase(j, s.group0_busy),
        };
        Some(self.offsets[level] + phase)
    }
}

/// Enumerates the levels in the order described in the module docs.
pub fn enumerate_states(n: usize, m: usize, k: usize) -> Result<StateSpace, QbdError> {
    if n < 1 || k < 1 || k > m {
        return Err(QbdError::InvalidParameters(format!(
            "need n >= 1 and 1 <= K <= m (n = {n}, m = {m}, K = {k})"
        )));
    }
    let mut levels = Vec::with_capacity(m + 1);
    levels.push((0..=n).map(|i| QbdState::new(i, GroupMode::Sleep, 0)).collect());
    for j in 1..=m {
        let mut level = Vec::with_capacity(n + 2);
        if j < k {
            level.push(QbdState::new(n, GroupMode::Sleep, j));
        }
        level.extend((0..=n).rev().map(|i| QbdState::new(i, GroupMode::WorkOn, j)));
        levels.push(level);
    }
    let mut offsets = vec![0];
    for lv in &levels {
        offsets.push(offsets.last().unwrap() + lv.len());
    }
    Ok(StateSpace {
        n,
        m,
        k,
        levels,
        offsets,
    })
}
