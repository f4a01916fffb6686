use nalgebra::DMatrix;

use super::{enumerate_states, QbdError, QbdParams, StateSpace};

/// Enumerated state space with its infinitesimal generator.
#[derive(Debug, Clone, PartialEq)]
pub struct QbdModel {
    pub params: QbdParams,
    pub space: StateSpace,
    pub generator: DMatrix<f64>,
}

/// Writes rates into the generator by (level, phase) coordinates.
struct Assembler<'a> {
    space: &'a StateSpace,
    q: DMatrix<f64>,
}

impl Assembler<'_> {
    fn rate(&mut self, from: (usize, usize), to: (usize, usize), rate: f64) {
        let a = self.space.offset(from.0) + from.1;
        let b = self.space.offset(to.0) + to.1;
        self.q[(a, b)] += rate;
    }

    /// Target of leaving level `j` downward from the sleep phase: one held
    /// customer moves into the freed group-0 server.
    fn sleep_phase(&self, level: usize) -> (usize, usize) {
        if level == 0 {
            (0, self.space.n)
        } else {
            (level, 0)
        }
    }
}

/// Assembles the block-tridiagonal generator level by level.
///
/// * Level 0: arrivals fill group 0; a full group 0 sends the next arrival
///   to the first holder slot of level 1, or straight to `(W,n;W,1)` when
///   `K = 1`.
/// * Sleep phase of levels `1..K`: arrivals add a holder, the `K`-th one
///   wakes group 1 into `(W,n;W,K)`; a group-0 completion pulls one holder
///   into group 0, giving `(W,n;S,j-1)`.
/// * Work-on phases: arrivals fill group 0 first, then group 1 (lost at
///   `(W,n;W,m)`); group-0 completions at `i mu0`, group-1 completions at
///   `j mu1`, the last of which puts group 1 to sleep in level 0.
pub fn build_generator(params: &QbdParams) -> Result<QbdModel, QbdError> {
    params.check()?;
    let QbdParams {
        n,
        m,
        k,
        lambda,
        mu0,
        mu1,
    } = *params;
    let space = enumerate_states(n, m, k)?;
    let size = space.len();
    let mut asm = Assembler {
        space: &space,
        q: DMatrix::zeros(size, size),
    };

    // level 0
    for i in 0..=n {
        if i < n {
            asm.rate((0, i), (0, i + 1), lambda);
        } else if k > 1 {
            asm.rate((0, n), (1, 0), lambda);
        } else {
            asm.rate((0, n), (1, space.work_phase(1, n)), lambda);
        }
        if i > 0 {
            asm.rate((0, i), (0, i - 1), i as f64 * mu0);
        }
    }

    for j in 1..=m {
        if j < k {
            let up = if j + 1 < k {
                (j + 1, 0)
            } else {
                (k, space.work_phase(k, n))
            };
            asm.rate((j, 0), up, lambda);
            let down = asm.sleep_phase(j - 1);
            asm.rate((j, 0), down, n as f64 * mu0);
        }
        for i in 0..=n {
            let here = (j, space.work_phase(j, i));
            if i < n {
                asm.rate(here, (j, space.work_phase(j, i + 1)), lambda);
            } else if j < m {
                asm.rate(here, (j + 1, space.work_phase(j + 1, n)), lambda);
            }
            if i > 0 {
                asm.rate(here, (j, space.work_phase(j, i - 1)), i as f64 * mu0);
            }
            let down = if j == 1 {
                (0, i)
            } else {
                (j - 1, space.work_phase(j - 1, i))
            };
            asm.rate(here, down, j as f64 * mu1);
        }
    }

    let mut q = asm.q;
    for a in 0..size {
        let off: f64 = (0..size).filter(|&b| b != a).map(|b| q[(a, b)]).sum();
        q[(a, a)] = -off;
    }
    Ok(QbdModel {
        params: *params,
        space,
        generator: q,
    })
}

impl QbdModel {
    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn levels(&self) -> usize {
        self.space.levels.len()
    }

    /// Copy of block `Q_{v,w}`.
    pub fn block(&self, v: usize, w: usize) -> DMatrix<f64> {
        let (r0, rows) = (self.space.offset(v), self.space.levels[v].len());
        let (c0, cols) = (self.space.offset(w), self.space.levels[w].len());
        self.generator.view((r0, c0), (rows, cols)).into_owned()
    }

    /// Largest absolute row sum.
    pub fn max_row_sum(&self) -> f64 {
        self.generator
            .row_iter()
            .map(|r| r.sum().abs())
            .fold(0.0, f64::max)
    }

    pub fn off_diagonals_nonnegative(&self) -> bool {
        let q = &self.generator;
        (0..q.nrows()).all(|a| (0..q.ncols()).all(|b| a == b || q[(a, b)] >= 0.0))
    }

    /// True when every block `Q_{v,w}` with `|v - w| >= 2` is zero.
    pub fn is_block_tridiagonal(&self) -> bool {
        let levels = self.levels();
        (0..levels).all(|v| {
            (0..levels)
                .filter(|w| v.abs_diff(*w) >= 2)
                .all(|w| self.block(v, w).iter().all(|&x| x == 0.0))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qbd::QbdState;
    use crate::sim::GroupMode::{Sleep, WorkOn};

    #[test]
    fn generator_properties() {
        for (n, m, k) in [(1, 1, 1), (2, 2, 2), (4, 4, 3), (3, 5, 4), (2, 6, 1)] {
            let model = build_generator(&QbdParams::new(n, m, k, 7.0, 2.0, 1.5)).unwrap();
            assert!(model.max_row_sum() < 1e-12);
            assert!(model.off_diagonals_nonnegative());
            assert!(model.is_block_tridiagonal());
        }
    }

    #[test]
    fn four_state_instance_by_hand() {
        let model = build_generator(&QbdParams::new(1, 1, 1, 1.0, 1.0, 1.0)).unwrap();
        // order: (W,0;S,0) (W,1;S,0) (W,1;W,1) (W,0;W,1)
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            -1.0,  1.0,  0.0,  0.0,
             1.0, -2.0,  1.0,  0.0,
             0.0,  1.0, -2.0,  1.0,
             1.0,  0.0,  1.0, -2.0,
        ]);
        assert_eq!(model.generator, expected);
    }

    #[test]
    fn wake_and_transfer_transitions() {
        let p = QbdParams::new(2, 3, 2, 3.0, 1.0, 0.5);
        let model = build_generator(&p).unwrap();
        let sp = &model.space;
        let at = |s: QbdState| sp.index_of(s).unwrap();
        let q = &model.generator;
        // holder accumulates at K - 1 = 1
        assert_eq!(q[(at(QbdState::new(2, Sleep, 0)), at(QbdState::new(2, Sleep, 1)))], 3.0);
        // K-th customer wakes the group
        assert_eq!(q[(at(QbdState::new(2, Sleep, 1)), at(QbdState::new(2, WorkOn, 2)))], 3.0);
        // group-0 completion pulls the holder over
        assert_eq!(q[(at(QbdState::new(2, Sleep, 1)), at(QbdState::new(2, Sleep, 0)))], 2.0);
        // last group-1 completion sends the group to sleep
        assert_eq!(q[(at(QbdState::new(1, WorkOn, 1)), at(QbdState::new(1, Sleep, 0)))], 0.5);
        // full system loses arrivals: no upward rate from (W,2;W,3)
        let full = at(QbdState::new(2, WorkOn, 3));
        assert_eq!(q[(full, full)], -(2.0 + 1.5));
    }

    #[test]
    fn block_shapes() {
        let model = build_generator(&QbdParams::new(4, 4, 3, 1.0, 1.0, 1.0)).unwrap();
        assert_eq!(model.block(0, 1).shape(), (5, 6));
        assert_eq!(model.block(2, 3).shape(), (6, 5));
        assert_eq!(model.block(4, 4).shape(), (5, 5));
    }
}
